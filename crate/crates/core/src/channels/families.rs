//! Correlated Pauli channels built from a Markov chain over per-qubit error
//! labels, and the two-qubit correlated amplitude-damping channel.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::diagonal::PauliDiagonalChannel;
use super::kraus::KrausChannel;
use super::ptm::check_full_ptm_qubits;
use crate::error::{Error, Result};
use crate::pauli::{check_qubits, Operator, PauliIndex};

const SUM_TOL: f64 = 1e-12;

/// Single-qubit error distribution `[p_I, p_X, p_Y, p_Z]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliProbabilities([f64; 4]);

impl PauliProbabilities {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidProbability(format!("{p:?} has a negative entry")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidProbability(format!("{p:?} sums to {total}")));
        }
        Ok(Self(p))
    }

    /// `[1−p, p, 0, 0]`.
    pub fn bit_flip(p: f64) -> Result<Self> {
        check_unit(p, "p")?;
        Self::new([1.0 - p, p, 0.0, 0.0])
    }

    /// `[1−p, 0, 0, p]`.
    pub fn dephasing(p: f64) -> Result<Self> {
        check_unit(p, "p")?;
        Self::new([1.0 - p, 0.0, 0.0, p])
    }

    /// `[1−3q/4, q/4, q/4, q/4]`.
    pub fn depolarizing(q: f64) -> Result<Self> {
        check_unit(q, "q")?;
        let e = q / 4.0;
        Self::new([1.0 - 3.0 * e, e, e, e])
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }
}

fn check_unit(v: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidCorrelation(mu));
    }
    Ok(())
}

/// Joint probabilities `p_{α₁…αₙ} = p_{α₁} Π p_{αⱼ|αⱼ₋₁}` with
/// `p_{b|a} = (1−μ)p_b + μδ_{ab}`, indexed lexicographically.
pub fn correlated_pauli_weights(n: usize, p: &PauliProbabilities, mu: f64) -> Result<Vec<f64>> {
    check_qubits(n)?;
    check_mu(mu)?;
    let p = p.as_array();
    let transition = |a: u8, b: u8| (1.0 - mu) * p[b as usize] + if a == b { mu } else { 0.0 };
    let weights: Vec<f64> = PauliIndex::all(n)?
        .map(|idx| {
            let digits = idx.digits();
            digits
                .windows(2)
                .fold(p[digits[0] as usize], |w, pair| w * transition(pair[0], pair[1]))
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidProbability(format!(
            "Markov weights sum to {total}"
        )));
    }
    Ok(weights)
}

/// Correlated Pauli channel in diagonal form; valid up to the dense cap.
pub fn correlated_pauli_diagonal(
    n: usize,
    p: &PauliProbabilities,
    mu: f64,
) -> Result<PauliDiagonalChannel> {
    PauliDiagonalChannel::from_probabilities(n, correlated_pauli_weights(n, p, mu)?)
}

/// Correlated Pauli channel in Kraus form `{√p_α σ_{α₁}⊗…⊗σ_{αₙ}}`.
pub fn correlated_pauli_channel(n: usize, p: &PauliProbabilities, mu: f64) -> Result<KrausChannel> {
    check_full_ptm_qubits(n)?;
    correlated_pauli_diagonal(n, p, mu)?.to_kraus()
}

pub fn bit_flip_channel(n: usize, p: f64, mu: f64) -> Result<KrausChannel> {
    correlated_pauli_channel(n, &PauliProbabilities::bit_flip(p)?, mu)
}

pub fn depolarizing_channel(n: usize, q: f64, mu: f64) -> Result<KrausChannel> {
    correlated_pauli_channel(n, &PauliProbabilities::depolarizing(q)?, mu)
}

pub fn dephasing_channel(n: usize, p: f64, mu: f64) -> Result<KrausChannel> {
    correlated_pauli_channel(n, &PauliProbabilities::dephasing(p)?, mu)
}

fn real(rows: usize, entries: &[f64]) -> Operator {
    let data: Vec<Complex64> = entries.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Operator::from_matrix(DMatrix::from_row_slice(rows, rows, &data))
        .expect("fixed-size Kraus operator")
}

/// Single-qubit amplitude-damping Kraus pair `(E₀, E₁)` with transmissivity `η`.
pub fn amplitude_damping_ops(eta: f64) -> Result<(Operator, Operator)> {
    check_unit(eta, "eta")?;
    let e0 = real(2, &[1.0, 0.0, 0.0, eta.sqrt()]);
    let e1 = real(2, &[0.0, (1.0 - eta).sqrt(), 0.0, 0.0]);
    Ok((e0, e1))
}

pub fn amplitude_damping(eta: f64) -> Result<KrausChannel> {
    let (e0, e1) = amplitude_damping_ops(eta)?;
    KrausChannel::new(vec![e0, e1])
}

/// Two-qubit channel `(1−μ)N₀ + μN₁`: `N₀` damps each qubit independently,
/// `N₁` only damps `|11⟩` to `|00⟩` jointly.
pub fn correlated_amplitude_damping(eta: f64, mu: f64) -> Result<KrausChannel> {
    check_mu(mu)?;
    let (e0, e1) = amplitude_damping_ops(eta)?;
    let free = Complex64::new((1.0 - mu).sqrt(), 0.0);
    let joint = Complex64::new(mu.sqrt(), 0.0);
    let mut ops = Vec::with_capacity(6);
    for a in [&e0, &e1] {
        for b in [&e0, &e1] {
            ops.push(a.kron(b)?.scale(free));
        }
    }
    let s = eta.sqrt();
    let r = (1.0 - eta).sqrt();
    #[rustfmt::skip]
    let b0 = real(4, &[
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, s,
    ]);
    let mut b1 = vec![0.0; 16];
    b1[3] = r;
    let b1 = real(4, &b1);
    ops.push(b0.scale(joint));
    ops.push(b1.scale(joint));
    KrausChannel::new(ops)
}
