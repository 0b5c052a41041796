//! Density-matrix evolution under repeated noise, exact and shot-sampled
//! Pauli expectations, and the end-to-end deconvolution experiment driver.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, ChannelConfig, QuantumMap};
use crate::characterization::{is_positive_semidefinite, positivity_coefficients};
use crate::deconvolution::{
    plan_general_repeated, plan_pauli_repeated, PlanKind, DEFAULT_COND_WARN, DEFAULT_INV_TOL,
};
use crate::error::{Error, Result};
use crate::observable::{Observable, HERMITIAN_TOL};
use crate::pauli::{Operator, PauliIndex};
use crate::sampling::{pauli_std_error, sample_pauli_mean, stream_rng, Estimate, EXPECTATION_SLACK};
use crate::textio::fmt_f64;

pub const DEFAULT_M_MAX: u32 = 40;
/// Allowed deviation of `Tr ρ` from 1 for initial states.
pub const TRACE_TOL: f64 = 1e-9;

/// `N^m(ρ)`: the same channel applied independently `m` times.
pub fn evolve(rho: &Operator, ch: &(impl QuantumMap + ?Sized), m: u32) -> Result<Operator> {
    let mut out = rho.clone();
    for _ in 0..m {
        out = ch.apply(&out)?;
    }
    Ok(out)
}

/// `Tr[𝒫ₖρ]`.
pub fn expectation_exact(rho: &Operator, k: PauliIndex) -> Result<f64> {
    if rho.n() != k.n() {
        return Err(Error::DimensionMismatch {
            expected: 1 << k.n(),
            found: rho.dim(),
        });
    }
    let e = rho.pauli_trace(k);
    if e.im.abs() > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput {
            deviation: e.im.abs(),
        });
    }
    Ok(e.re)
}

/// How shot outcomes are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Binomial draw from the ±1 marginal `P(+1) = (1 + e)/2`.
    #[default]
    Marginal,
    /// Projective measurement in the eigenbasis of `𝒫ₖ` over all `2ⁿ`
    /// outcomes, parity computed per shot.
    FullOutcome,
}

/// Outcome probabilities after rotating each qubit into the eigenbasis of
/// its Pauli factor.
fn outcome_probabilities(rho: &Operator, k: PauliIndex) -> Vec<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut u = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for digit in k.digits() {
        let local = match digit {
            1 => DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
            // H·S†
            2 => DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, -s), c(s, 0.0), c(0.0, s)]),
            _ => DMatrix::identity(2, 2),
        };
        u = u.kronecker(&local);
    }
    let rotated = &u * rho.matrix() * u.adjoint();
    (0..rho.dim()).map(|b| rotated[(b, b)].re.max(0.0)).collect()
}

fn parity_sign(k: PauliIndex, outcome: usize) -> f64 {
    let n = k.n();
    let support: usize = k
        .digits()
        .iter()
        .enumerate()
        .filter(|(_, d)| **d != 0)
        .map(|(i, _)| 1usize << (n - 1 - i))
        .sum();
    if (outcome & support).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn sample_full_outcome(rho: &Operator, k: PauliIndex, shots: u64, rng: &mut ChaCha8Rng) -> Result<Estimate> {
    let probs = outcome_probabilities(rho, k);
    let total: f64 = probs.iter().sum();
    // Multinomial draw as a chain of conditional binomials.
    let mut remaining = shots;
    let mut mass = total;
    let mut sum = 0.0;
    for (b, p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let count = if b + 1 == probs.len() || mass <= 0.0 {
            remaining
        } else {
            let frac = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, frac)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(rng)
        };
        sum += parity_sign(k, b) * count as f64;
        remaining -= count;
        mass -= p;
    }
    let value = sum / shots as f64;
    Ok(Estimate {
        value,
        std_error: pauli_std_error(value, shots),
    })
}

/// Shot estimate of `⟨𝒫ₖ⟩ρ` from `rng`; `shots = 0` gives the exact value.
pub fn sample_expectation(
    rho: &Operator,
    k: PauliIndex,
    shots: u64,
    mode: SamplingMode,
    rng: &mut ChaCha8Rng,
) -> Result<Estimate> {
    let e = expectation_exact(rho, k)?;
    if shots == 0 || mode == SamplingMode::Marginal {
        return sample_pauli_mean(e, shots, rng);
    }
    if !(e.abs() <= 1.0 + EXPECTATION_SLACK) {
        return Err(Error::ProbabilityOutOfRange(e));
    }
    sample_full_outcome(rho, k, shots, rng)
}

/// One measured (and optionally deconvolved) value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRecord {
    pub mu: Option<f64>,
    pub q: Option<f64>,
    pub m: u32,
    /// Pauli label, or `O` for the full observable.
    pub k: String,
    pub shots: u64,
    pub seed: u64,
    pub value: f64,
    pub std_error: f64,
    pub deconvolved: Option<f64>,
    pub deconvolved_std_error: Option<f64>,
}

/// Marginal-mode sample of `⟨𝒫ₖ⟩ρ` as a standalone record.
pub fn expectation_sampled(rho: &Operator, k: PauliIndex, shots: u64, seed: u64) -> Result<ExpectationRecord> {
    let est = sample_expectation(
        rho,
        k,
        shots,
        SamplingMode::Marginal,
        &mut stream_rng(seed, &[k.index() as u64]),
    )?;
    Ok(ExpectationRecord {
        mu: None,
        q: None,
        m: 0,
        k: k.label(),
        shots,
        seed,
        value: est.value,
        std_error: est.std_error,
        deconvolved: None,
        deconvolved_std_error: None,
    })
}

/// Named initial states, or an explicit density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    /// `zero`, `plus`, `maximally_mixed` or `basis:<bits>`.
    Preset(String),
    Matrix {
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
}

impl InitialState {
    pub fn zero() -> Self {
        InitialState::Preset("zero".into())
    }

    pub fn build(&self, n: usize) -> Result<Operator> {
        let rho = match self {
            InitialState::Preset(name) => preset_state(name, n)?,
            InitialState::Matrix { re, im } => {
                let d = re.len();
                let mut m = DMatrix::<Complex64>::zeros(d, d);
                for (i, row) in re.iter().enumerate() {
                    if row.len() != d {
                        return Err(Error::DimensionMismatch { expected: d, found: row.len() });
                    }
                    for (j, v) in row.iter().enumerate() {
                        m[(i, j)].re = *v;
                    }
                }
                if let Some(im) = im {
                    if im.len() != d {
                        return Err(Error::DimensionMismatch { expected: d, found: im.len() });
                    }
                    for (i, row) in im.iter().enumerate() {
                        if row.len() != d {
                            return Err(Error::DimensionMismatch { expected: d, found: row.len() });
                        }
                        for (j, v) in row.iter().enumerate() {
                            m[(i, j)].im = *v;
                        }
                    }
                }
                Operator::from_matrix(m)?
            }
        };
        if rho.n() != n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: rho.dim(),
            });
        }
        validate_state(&rho)?;
        Ok(rho)
    }
}

fn preset_state(name: &str, n: usize) -> Result<Operator> {
    match name {
        "zero" => Operator::basis_projector(n, 0),
        "maximally_mixed" => Operator::maximally_mixed(n),
        "plus" => {
            let d = 1usize << n;
            let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
            Operator::pure_state(&vec![amp; d])
        }
        other => {
            let bits = other
                .strip_prefix("basis:")
                .ok_or_else(|| Error::Config(format!("unknown initial state {other:?}")))?;
            if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::Config(format!(
                    "basis state {bits:?} must be {n} characters of 0/1"
                )));
            }
            Operator::basis_projector(n, usize::from_str_radix(bits, 2).expect("checked binary"))
        }
    }
}

/// Unit trace, Hermitian and positive semidefinite.
pub fn validate_state(rho: &Operator) -> Result<()> {
    let deviation = rho.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { deviation });
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::NotUnitTrace(tr));
    }
    let s = positivity_coefficients(rho);
    if !is_positive_semidefinite(&s) {
        let min_coefficient = s.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::NotPositiveSemidefinite { min_coefficient });
    }
    Ok(())
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    channel: ChannelConfig,
    #[serde(default = "InitialState::zero")]
    initial_state: InitialState,
    #[serde(default = "default_m_max")]
    m_max: u32,
    #[serde(default)]
    shots: u64,
    #[serde(default)]
    seed: u64,
    observable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_grid: Option<Vec<f64>>,
    #[serde(default)]
    sampling: SamplingMode,
}

fn default_m_max() -> u32 {
    DEFAULT_M_MAX
}

/// A repeated-noise deconvolution experiment.
///
/// ```toml
/// initial_state = "zero"
/// m_max = 40
/// shots = 8192
/// seed = 2024
/// observable = "ZZZ 1.0"
/// mu_grid = [0.0, 0.25, 0.5, 0.75, 1.0]
///
/// [channel]
/// family = "depolarizing"
/// n = 3
/// q = 0.00052
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelConfig,
    pub initial_state: InitialState,
    pub m_max: u32,
    /// 0 selects exact expectations.
    pub shots: u64,
    pub seed: u64,
    pub observable: Observable,
    /// Overrides the channel's `mu` when present.
    pub mu_grid: Option<Vec<f64>>,
    /// Overrides the channel's strength parameter (`p`, `q` or `η`).
    pub q_grid: Option<Vec<f64>>,
    pub sampling: SamplingMode,
}

impl ExperimentConfig {
    pub fn new(channel: ChannelConfig, observable: Observable) -> Self {
        Self {
            channel,
            initial_state: InitialState::zero(),
            m_max: DEFAULT_M_MAX,
            shots: 0,
            seed: 0,
            observable,
            mu_grid: None,
            q_grid: None,
            sampling: SamplingMode::Marginal,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawExperiment =
            toml::from_str(text).map_err(|e| crate::channels::toml_error(text, &e))?;
        let observable = Observable::parse(&raw.observable)
            .map_err(|e| Error::Config(format!("observable: {e}")))?;
        Ok(Self {
            channel: raw.channel,
            initial_state: raw.initial_state,
            m_max: raw.m_max,
            shots: raw.shots,
            seed: raw.seed,
            observable,
            mu_grid: raw.mu_grid,
            q_grid: raw.q_grid,
            sampling: raw.sampling,
        })
    }

    pub fn to_toml_string(&self) -> String {
        let raw = RawExperiment {
            channel: self.channel.clone(),
            initial_state: self.initial_state.clone(),
            m_max: self.m_max,
            shots: self.shots,
            seed: self.seed,
            observable: self.observable.to_text(),
            mu_grid: self.mu_grid.clone(),
            q_grid: self.q_grid.clone(),
            sampling: self.sampling,
        };
        toml::to_string(&raw).expect("experiment config serializes")
    }

    /// Channel configs for every grid point, `mu` outermost.
    pub fn grid(&self) -> Result<Vec<ChannelConfig>> {
        let mus = self.mu_grid.clone().unwrap_or_else(|| vec![self.channel.mu()]);
        let mut out = Vec::new();
        for mu in mus {
            let base = self.channel.with_mu(mu);
            match &self.q_grid {
                Some(qs) => {
                    for q in qs {
                        out.push(base.with_strength(*q)?);
                    }
                }
                None => out.push(base),
            }
        }
        Ok(out)
    }
}

struct GridPoint {
    config: ChannelConfig,
    channel: Channel,
    states: Vec<Operator>,
}

fn measure_all(
    rho: &Operator,
    ks: &[PauliIndex],
    cfg: &ExperimentConfig,
    path: [u64; 2],
) -> Result<BTreeMap<PauliIndex, Estimate>> {
    ks.iter()
        .map(|&k| {
            let est = if k.is_identity() {
                Estimate::exact(1.0)
            } else {
                let mut rng = stream_rng(cfg.seed, &[path[0], path[1], k.index() as u64]);
                sample_expectation(rho, k, cfg.shots, cfg.sampling, &mut rng)?
            };
            Ok((k, est))
        })
        .collect()
}

fn records_for(point: &GridPoint, g: usize, m: u32, cfg: &ExperimentConfig) -> Result<Vec<ExpectationRecord>> {
    let obs = &cfg.observable;
    let rho = &point.states[m as usize];
    let terms: Vec<PauliIndex> = obs.terms().keys().copied().collect();
    let (plan, measured) = match point.channel.to_diagonal()? {
        Some(diag) => (plan_pauli_repeated(obs, &diag, m, DEFAULT_INV_TOL)?, terms.clone()),
        None => {
            let ptm = point.channel.ptm()?;
            let plan = plan_general_repeated(obs, &ptm, m, DEFAULT_COND_WARN)?;
            (plan, PauliIndex::all(obs.n())?.collect())
        }
    };
    let noisy = measure_all(rho, &measured, cfg, [g as u64, m as u64])?;

    let base = |k: String, value: Estimate, deconv: Estimate| ExpectationRecord {
        mu: Some(point.config.mu()),
        q: point.config.strength(),
        m,
        k,
        shots: cfg.shots,
        seed: cfg.seed,
        value: value.value,
        std_error: value.std_error,
        deconvolved: Some(deconv.value),
        deconvolved_std_error: Some(deconv.std_error),
    };

    let mut out = Vec::with_capacity(terms.len() + 1);
    for &k in &terms {
        let deconv = match plan.kind() {
            PlanKind::Diagonal { factors } => {
                let f = factors[&k];
                Estimate {
                    value: f * noisy[&k].value,
                    std_error: f.abs() * noisy[&k].std_error,
                }
            }
            PlanKind::General { inverse_adjoint } => {
                let mut value = 0.0;
                let mut var = 0.0;
                for (j, est) in &noisy {
                    let w = inverse_adjoint[(j.index(), k.index())];
                    value += w * est.value;
                    var += (w * est.std_error).powi(2);
                }
                Estimate {
                    value,
                    std_error: var.sqrt(),
                }
            }
        };
        out.push(base(k.label(), noisy[&k], deconv));
    }
    if obs.r() > 1 {
        let mut value = 0.0;
        let mut var = 0.0;
        for (k, c) in obs.terms() {
            value += c * noisy[k].value;
            var += (c * noisy[k].std_error).powi(2);
        }
        let deconv = plan.deconvolve_estimates(&noisy)?;
        out.push(base(
            "O".into(),
            Estimate {
                value,
                std_error: var.sqrt(),
            },
            deconv,
        ));
    }
    Ok(out)
}

/// Runs every grid point for `m = 0..=m_max`. Records come back ordered by
/// grid point, then `m`, then Pauli term, with the aggregate `O` row last.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExpectationRecord>> {
    let n = cfg.channel.n();
    if cfg.observable.n() != n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: 1 << cfg.observable.n(),
        });
    }
    let rho0 = cfg.initial_state.build(n)?;
    let points: Vec<GridPoint> = cfg
        .grid()?
        .into_par_iter()
        .map(|config| {
            let channel = config.build()?;
            let mut states = Vec::with_capacity(cfg.m_max as usize + 1);
            states.push(rho0.clone());
            for _ in 0..cfg.m_max {
                let next = channel.apply(states.last().expect("nonempty"))?;
                states.push(next);
            }
            Ok(GridPoint {
                config,
                channel,
                states,
            })
        })
        .collect::<Result<_>>()?;
    let tasks: Vec<(usize, u32)> = (0..points.len())
        .flat_map(|g| (0..=cfg.m_max).map(move |m| (g, m)))
        .collect();
    let chunks: Vec<Vec<ExpectationRecord>> = tasks
        .par_iter()
        .map(|&(g, m)| records_for(&points[g], g, m, cfg))
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

pub const CSV_HEADER: &str = "mu,q,m,k,shots,seed,noisy,noisy_stderr,deconvolved,deconvolved_stderr";

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// CSV with shortest round-trip number formatting.
pub fn records_to_csv(records: &[ExpectationRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            opt(r.mu),
            opt(r.q),
            r.m,
            r.k,
            r.shots,
            r.seed,
            fmt_f64(r.value),
            fmt_f64(r.std_error),
            opt(r.deconvolved),
            opt(r.deconvolved_std_error)
        );
    }
    out
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_toml_str(s)
    }
}
