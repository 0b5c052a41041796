//! Shot sampling of ±1-valued Pauli measurements and deterministic RNG streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `|⟨𝒫⟩| ≤ 1` before the value counts as corrupted.
pub const EXPECTATION_SLACK: f64 = 1e-9;

/// A measured (or exact) value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// RNG for the task identified by `path` under the experiment `seed`.
/// Streams for distinct paths are independent and do not depend on the
/// order in which tasks run.
pub fn stream_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let stream = path
        .iter()
        .fold(0x5eed_u64, |acc, &p| splitmix64(acc ^ splitmix64(p)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `√((1 − v²)/shots)`, the standard error of a mean of ±1 outcomes.
pub fn pauli_std_error(value: f64, shots: u64) -> f64 {
    if shots == 0 {
        return 0.0;
    }
    ((1.0 - value * value).max(0.0) / shots as f64).sqrt()
}

/// Mean of `shots` ±1 outcomes with `P(+1) = (1 + e)/2`. `shots = 0` returns
/// the exact value.
pub fn sample_pauli_mean(expectation: f64, shots: u64, rng: &mut ChaCha8Rng) -> Result<Estimate> {
    if !(expectation.abs() <= 1.0 + EXPECTATION_SLACK) {
        return Err(Error::ProbabilityOutOfRange(expectation));
    }
    let e = expectation.clamp(-1.0, 1.0);
    if shots == 0 {
        return Ok(Estimate::exact(e));
    }
    let p_plus = (1.0 + e) / 2.0;
    let plus = Binomial::new(shots, p_plus)
        .expect("probability clamped to [0, 1]")
        .sample(rng);
    let value = (2.0 * plus as f64 - shots as f64) / shots as f64;
    Ok(Estimate {
        value,
        std_error: pauli_std_error(value, shots),
    })
}
