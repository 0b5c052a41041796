//! Recovery of noiseless expectation values from noisy Pauli measurements.
//!
//! Two plans are available:
//!
//! * the diagonal fast path for Pauli channels, where each nonzero component
//!   `Oₖ` is rescaled by `1/λₖ` and only `r` PTM entries are read;
//! * the general path, which inverts the adjoint PTM of an arbitrary
//!   invertible channel and reads all `d⁴` of its entries.
//!
//! Both reduce a plan to a set of measurement weights `wⱼ` so that
//! `⟨O⟩_ρ = Σⱼ wⱼ ⟨𝒫ⱼ⟩_{ρ'}`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::channels::{Channel, PauliDiagonalChannel, Ptm};
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::pauli::PauliIndex;
use crate::sampling::Estimate;
use crate::textio::{parse_f64, tokens};

/// Diagonal entries with `|λ| ≤ DEFAULT_INV_TOL` count as non-invertible.
pub const DEFAULT_INV_TOL: f64 = 1e-12;
/// Condition number above which a general plan is flagged ill-conditioned.
pub const DEFAULT_COND_WARN: f64 = 1e8;
/// Condition number above which the PTM is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e14;
/// General-path weights below this fraction of the largest are dropped.
const WEIGHT_PRUNE: f64 = 1e-14;

/// Source of diagonal PTM entries `λₖ = Γₖₖ`.
pub trait DiagonalSource {
    fn n(&self) -> usize;
    fn diagonal_entry(&self, k: PauliIndex) -> Result<f64>;
}

impl DiagonalSource for PauliDiagonalChannel {
    fn n(&self) -> usize {
        PauliDiagonalChannel::n(self)
    }

    fn diagonal_entry(&self, k: PauliIndex) -> Result<f64> {
        Ok(self.lambda(k))
    }
}

impl DiagonalSource for Ptm {
    fn n(&self) -> usize {
        Ptm::n(self)
    }

    fn diagonal_entry(&self, k: PauliIndex) -> Result<f64> {
        Ok(self.entry(k, k))
    }
}

impl DiagonalSource for Channel {
    fn n(&self) -> usize {
        Channel::n(self)
    }

    fn diagonal_entry(&self, k: PauliIndex) -> Result<f64> {
        Channel::diagonal_entry(self, k)
    }
}

/// Where the Pauli factor sits in a Pauli/non-Pauli composition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompositionOrder {
    /// `N = P ∘ G`: the non-Pauli map acts first.
    PauliAfter,
    /// `N = G ∘ P`: the Pauli map acts first.
    PauliBefore,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlanKind {
    /// `factors[k] = λₖ^(−m)` for every nonzero `Oₖ`.
    Diagonal { factors: BTreeMap<PauliIndex, f64> },
    /// Full inverse adjoint PTM `(Γ*)⁻¹`.
    General { inverse_adjoint: DMatrix<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeconvolutionPlan {
    observable: Observable,
    kind: PlanKind,
    weights: BTreeMap<PauliIndex, f64>,
    entries_consulted: usize,
    repetitions: u32,
    condition_number: Option<f64>,
    ill_conditioned: bool,
}

fn check_same_n(obs: &Observable, n: usize) -> Result<()> {
    if obs.n() != n {
        return Err(Error::DimensionMismatch {
            expected: 1 << (2 * n),
            found: 1 << (2 * obs.n()),
        });
    }
    Ok(())
}

/// `λₖ^(−m)`; fails when `|λₖ| ≤ inv_tol`.
pub fn reconstruction_factor(
    src: &(impl DiagonalSource + ?Sized),
    k: PauliIndex,
    m: u32,
    inv_tol: f64,
) -> Result<f64> {
    let lambda = src.diagonal_entry(k)?;
    if !(lambda.abs() > inv_tol) {
        return Err(Error::NonInvertibleChannel {
            label: k.label(),
            lambda,
        });
    }
    Ok(lambda.powi(-(m as i32)))
}

/// Diagonal-path plan for one application of a Pauli channel.
pub fn plan_pauli(
    obs: &Observable,
    src: &(impl DiagonalSource + Sync + ?Sized),
    inv_tol: f64,
) -> Result<DeconvolutionPlan> {
    plan_pauli_repeated(obs, src, 1, inv_tol)
}

/// Diagonal-path plan for `m` successive applications of a Pauli channel.
pub fn plan_pauli_repeated(
    obs: &Observable,
    src: &(impl DiagonalSource + Sync + ?Sized),
    m: u32,
    inv_tol: f64,
) -> Result<DeconvolutionPlan> {
    check_same_n(obs, src.n())?;
    let terms: Vec<(PauliIndex, f64)> = obs.terms().iter().map(|(k, c)| (*k, *c)).collect();
    let factors: Vec<(PauliIndex, f64)> = terms
        .par_iter()
        .map(|(k, _)| reconstruction_factor(src, *k, m, inv_tol).map(|f| (*k, f)))
        .collect::<Result<_>>()?;
    let weights = factors
        .iter()
        .zip(&terms)
        .map(|((k, f), (_, c))| (*k, f * c))
        .collect();
    Ok(DeconvolutionPlan {
        observable: obs.clone(),
        entries_consulted: factors.len(),
        kind: PlanKind::Diagonal {
            factors: factors.into_iter().collect(),
        },
        weights,
        repetitions: m,
        condition_number: None,
        ill_conditioned: false,
    })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse with its 1-norm condition number; pivoted LU underneath.
fn invert(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let inv = m.clone().lu().try_inverse().ok_or(Error::SingularPtm {
        condition: f64::INFINITY,
    })?;
    let condition = one_norm(m) * one_norm(&inv);
    if !condition.is_finite() || condition > SINGULAR_CONDITION {
        return Err(Error::SingularPtm { condition });
    }
    Ok((inv, condition))
}

fn general_plan(
    obs: &Observable,
    inverse_adjoint: DMatrix<f64>,
    condition: f64,
    cond_warn: f64,
    entries_consulted: usize,
    m: u32,
) -> DeconvolutionPlan {
    let ill_conditioned = condition > cond_warn;
    if ill_conditioned {
        log::warn!(
            "inverse adjoint PTM is ill-conditioned (condition number {condition:e} > {cond_warn:e})"
        );
    }
    let n = obs.n();
    let side = inverse_adjoint.nrows();
    let raw: Vec<f64> = (0..side)
        .map(|j| {
            obs.terms()
                .iter()
                .map(|(q, c)| inverse_adjoint[(j, q.index())] * c)
                .sum()
        })
        .collect();
    let largest = raw.iter().map(|w| w.abs()).fold(0.0, f64::max);
    let weights = raw
        .into_iter()
        .enumerate()
        .filter(|(_, w)| w.abs() > WEIGHT_PRUNE * largest)
        .map(|(j, w)| (PauliIndex::new(n, j).expect("index within basis"), w))
        .collect();
    DeconvolutionPlan {
        observable: obs.clone(),
        kind: PlanKind::General { inverse_adjoint },
        weights,
        entries_consulted,
        repetitions: m,
        condition_number: Some(condition),
        ill_conditioned,
    }
}

/// General-path plan: `(Γ*)⁻¹` for a single application of the channel.
pub fn plan_general(obs: &Observable, ptm: &Ptm, cond_warn: f64) -> Result<DeconvolutionPlan> {
    plan_general_repeated(obs, ptm, 1, cond_warn)
}

/// General-path plan for `m` successive applications: inverts `(Γ^m)*`.
pub fn plan_general_repeated(
    obs: &Observable,
    ptm: &Ptm,
    m: u32,
    cond_warn: f64,
) -> Result<DeconvolutionPlan> {
    check_same_n(obs, ptm.n())?;
    let adjoint = ptm.power(m).adjoint();
    let (inverse_adjoint, condition) = invert(adjoint.matrix())?;
    let side = inverse_adjoint.nrows();
    Ok(general_plan(obs, inverse_adjoint, condition, cond_warn, side * side, m))
}

/// Plan for a Pauli channel composed with a non-Pauli one. Only the
/// non-Pauli PTM is inverted numerically; the Pauli factor enters as an
/// analytic rescaling of rows (`PauliAfter`) or columns (`PauliBefore`).
pub fn plan_composed(
    obs: &Observable,
    pauli: &PauliDiagonalChannel,
    other: &Ptm,
    order: CompositionOrder,
    inv_tol: f64,
    cond_warn: f64,
) -> Result<DeconvolutionPlan> {
    check_same_n(obs, other.n())?;
    check_same_n(obs, pauli.n())?;
    let (mut inverse_adjoint, condition) = invert(other.adjoint().matrix())?;
    let inv_lambdas = PauliIndex::all(pauli.n())?
        .map(|k| reconstruction_factor(pauli, k, 1, inv_tol))
        .collect::<Result<Vec<f64>>>()?;
    // (DG)*⁻¹ = D⁻¹ G*⁻¹ and (GD)*⁻¹ = G*⁻¹ D⁻¹.
    match order {
        CompositionOrder::PauliAfter => {
            for (j, f) in inv_lambdas.iter().enumerate() {
                inverse_adjoint.row_mut(j).scale_mut(*f);
            }
        }
        CompositionOrder::PauliBefore => {
            for (q, f) in inv_lambdas.iter().enumerate() {
                inverse_adjoint.column_mut(q).scale_mut(*f);
            }
        }
    }
    let side = inverse_adjoint.nrows();
    Ok(general_plan(
        obs,
        inverse_adjoint,
        condition,
        cond_warn,
        side * side + side,
        1,
    ))
}

impl DeconvolutionPlan {
    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn kind(&self) -> &PlanKind {
        &self.kind
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, PlanKind::Diagonal { .. })
    }

    /// PTM entries read to build the plan: `r` on the diagonal path, `d⁴`
    /// on the general path.
    pub fn entries_consulted(&self) -> usize {
        self.entries_consulted
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions
    }

    pub fn condition_number(&self) -> Option<f64> {
        self.condition_number
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.ill_conditioned
    }

    /// Rescaling factor applied to `⟨𝒫ₖ⟩`; on the general path this is the
    /// diagonal entry of the inverse adjoint PTM.
    pub fn factor(&self, k: PauliIndex) -> Option<f64> {
        match &self.kind {
            PlanKind::Diagonal { factors } => factors.get(&k).copied(),
            PlanKind::General { inverse_adjoint } => Some(inverse_adjoint[(k.index(), k.index())]),
        }
    }

    /// `wⱼ` such that `⟨O⟩_ρ = Σⱼ wⱼ ⟨𝒫ⱼ⟩_{ρ'}`.
    pub fn weights(&self) -> &BTreeMap<PauliIndex, f64> {
        &self.weights
    }

    pub fn weight(&self, j: PauliIndex) -> f64 {
        self.weights.get(&j).copied().unwrap_or(0.0)
    }

    /// Pauli components that must be measured on the noisy state. The
    /// identity is never listed since `⟨𝟙⟩ = 1`.
    pub fn required_measurements(&self) -> Vec<PauliIndex> {
        self.weights
            .keys()
            .filter(|k| !k.is_identity())
            .copied()
            .collect()
    }

    /// `Σⱼ wⱼ noisy[j]`, summed in index order.
    pub fn deconvolve(&self, noisy: &BTreeMap<PauliIndex, f64>) -> Result<f64> {
        let mut total = 0.0;
        for (j, w) in &self.weights {
            total += w * lookup(noisy, *j)?;
        }
        Ok(total)
    }

    /// Like [`deconvolve`](Self::deconvolve) with standard errors propagated
    /// as `√Σ (wⱼσⱼ)²` (independent measurements).
    pub fn deconvolve_estimates(&self, noisy: &BTreeMap<PauliIndex, Estimate>) -> Result<Estimate> {
        let mut value = 0.0;
        let mut var = 0.0;
        for (j, w) in &self.weights {
            let est = if j.is_identity() {
                noisy.get(j).copied().unwrap_or(Estimate::exact(1.0))
            } else {
                *noisy
                    .get(j)
                    .ok_or_else(|| Error::MissingMeasurement(j.label()))?
            };
            value += w * est.value;
            var += (w * est.std_error).powi(2);
        }
        Ok(Estimate {
            value,
            std_error: var.sqrt(),
        })
    }
}

fn lookup(noisy: &BTreeMap<PauliIndex, f64>, j: PauliIndex) -> Result<f64> {
    match noisy.get(&j) {
        Some(v) => Ok(*v),
        None if j.is_identity() => Ok(1.0),
        None => Err(Error::MissingMeasurement(j.label())),
    }
}

/// Parses noisy measurements, one `LABEL value [std_error]` per line.
/// `#` starts a comment.
pub fn parse_measurements(text: &str) -> Result<BTreeMap<PauliIndex, Estimate>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let Some(toks) = tokens(line) else { continue };
        if toks.len() < 2 || toks.len() > 3 {
            let col = toks.get(3).map_or(toks[0].column, |t| t.column);
            return Err(Error::parse(line_no, col, "expected `<pauli-string> <value> [std_error]`"));
        }
        let k = PauliIndex::from_label(toks[0].text)
            .map_err(|e| Error::parse(line_no, toks[0].column, e.to_string()))?;
        let value = parse_f64(&toks[1], line_no)?;
        let std_error = match toks.get(2) {
            Some(t) => parse_f64(t, line_no)?,
            None => 0.0,
        };
        if out.insert(k, Estimate { value, std_error }).is_some() {
            return Err(Error::parse(line_no, toks[0].column, format!("duplicate measurement for {}", k.label())));
        }
    }
    Ok(out)
}
