//! Noise deconvolution of a two-qubit observable under a correlated bit-flip
//! channel: measure on the noisy state, rescale by 1/λ, recover Tr[ρO].
//!
//! cargo run --example deconvolve_observable

use std::collections::BTreeMap;

use pauli_deconv::channels::{correlated_pauli_diagonal, PauliProbabilities};
use pauli_deconv::deconvolution::{plan_pauli, DEFAULT_INV_TOL};
use pauli_deconv::observable::Observable;
use pauli_deconv::pauli::Operator;
use pauli_deconv::sampling::stream_rng;
use pauli_deconv::simulator::{sample_expectation, SamplingMode};
use pauli_deconv::Result;

fn main() -> Result<()> {
    let obs = Observable::parse("ZZ 1.0\nXI 0.5\nYY -0.25\n")?;
    let ch = correlated_pauli_diagonal(2, &PauliProbabilities::bit_flip(0.15)?, 0.4)?;

    // (|00> + |11>)/sqrt(2)
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amp = |x: f64| num_complex::Complex64::new(x, 0.0);
    let rho = Operator::pure_state(&[amp(s), amp(0.0), amp(0.0), amp(s)])?;
    let ideal = obs.expectation(&rho)?;
    let noisy_state = ch.apply(&rho)?;

    let plan = plan_pauli(&obs, &ch, DEFAULT_INV_TOL)?;
    println!("observable:\n{obs}");
    for k in plan.required_measurements() {
        println!("factor 1/lambda_{} = {:.6}", k.label(), plan.factor(k).unwrap());
    }

    for shots in [0u64, 1024, 65536] {
        let mut noisy = BTreeMap::new();
        for k in plan.required_measurements() {
            let mut rng = stream_rng(2024, &[k.index() as u64]);
            noisy.insert(k, sample_expectation(&noisy_state, k, shots, SamplingMode::Marginal, &mut rng)?);
        }
        let raw: f64 = obs.terms().iter().map(|(k, c)| c * noisy.get(k).map_or(1.0, |e| e.value)).sum();
        let est = plan.deconvolve_estimates(&noisy)?;
        println!(
            "shots {shots:>6}: noisy {raw:+.5}  deconvolved {:+.5} ± {:.5}  (ideal {ideal:+.5})",
            est.value, est.std_error
        );
    }
    println!("entries consulted: {}", plan.entries_consulted());
    Ok(())
}
