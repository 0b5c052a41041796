use num_complex::Complex64;
use rayon::prelude::*;

use super::kraus::KrausChannel;
use super::ptm::{check_full_ptm_qubits, Ptm};
use crate::error::{Error, Result};
use crate::pauli::{check_qubits, devectorize, pauli_element, vectorize, Operator, PauliIndex, VectorizedOperator};

const PROBABILITY_TOL: f64 = 1e-10;

/// Pauli channel `Φ(ρ) = Σⱼ βⱼ 𝒫ⱼρ𝒫ⱼ`, stored through its diagonal PTM
/// entries `λⱼ` (and the probabilities `βⱼ` when known).
#[derive(Clone, Debug, PartialEq)]
pub struct PauliDiagonalChannel {
    n: usize,
    probs: Option<Vec<f64>>,
    lambdas: Vec<f64>,
}

impl PauliDiagonalChannel {
    /// From Pauli error probabilities `β` (length `4ⁿ`).
    pub fn from_probabilities(n: usize, probs: Vec<f64>) -> Result<Self> {
        check_qubits(n)?;
        let len = 1usize << (2 * n);
        if probs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: probs.len(),
            });
        }
        if let Some((k, b)) = probs.iter().enumerate().find(|(_, b)| !(**b >= 0.0)) {
            return Err(Error::InvalidProbability(format!(
                "beta[{k}] = {b} is negative"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidProbability(format!(
                "probabilities sum to {total}"
            )));
        }
        let lambdas = lambdas_from_probabilities(n, &probs);
        Ok(Self {
            n,
            probs: Some(probs),
            lambdas,
        })
    }

    /// From diagonal PTM entries directly (`λ₀ = 1`, `|λⱼ| ≤ 1`).
    pub fn from_lambdas(n: usize, lambdas: Vec<f64>) -> Result<Self> {
        check_qubits(n)?;
        let len = 1usize << (2 * n);
        if lambdas.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: lambdas.len(),
            });
        }
        if (lambdas[0] - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "lambda_0 = {} but trace preservation requires 1",
                lambdas[0]
            )));
        }
        if let Some(l) = lambdas
            .iter()
            .find(|l| !l.is_finite() || l.abs() > 1.0 + PROBABILITY_TOL)
        {
            return Err(Error::InvalidParameter(format!(
                "|lambda| = {l} exceeds 1"
            )));
        }
        Ok(Self {
            n,
            probs: None,
            lambdas,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut probs = vec![0.0; 1 << (2 * n)];
        probs[0] = 1.0;
        Self::from_probabilities(n, probs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probabilities(&self) -> Option<&[f64]> {
        self.probs.as_deref()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, k: PauliIndex) -> f64 {
        self.lambdas[k.index()]
    }

    /// Kraus form `{√βⱼ 𝒫ⱼ}` over the nonzero probabilities.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        check_full_ptm_qubits(self.n)?;
        let probs = self.probs.as_ref().ok_or_else(|| {
            Error::InvalidParameter("Kraus form needs the Pauli probabilities".into())
        })?;
        let ops = PauliIndex::all(self.n)?
            .zip(probs)
            .filter(|(_, b)| **b > 0.0)
            .map(|(idx, b)| pauli_element(idx).scale(Complex64::new(b.sqrt(), 0.0)))
            .collect();
        KrausChannel::new(ops)
    }

    pub fn to_ptm(&self) -> Result<Ptm> {
        Ptm::from_diagonal(self.n, &self.lambdas)
    }

    /// m-fold composition: `λⱼ ↦ λⱼ^m`.
    pub fn power(&self, m: u32) -> Self {
        Self {
            n: self.n,
            probs: None,
            lambdas: self.lambdas.iter().map(|l| l.powi(m as i32)).collect(),
        }
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                found: rho.dim(),
            });
        }
        match &self.probs {
            Some(probs) => {
                let d = rho.dim();
                let mut out = nalgebra::DMatrix::<Complex64>::zeros(d, d);
                for (idx, &b) in PauliIndex::all(self.n)?.zip(probs) {
                    if b > 0.0 {
                        out += rho.conjugate_by_pauli(idx).into_matrix() * Complex64::new(b, 0.0);
                    }
                }
                Operator::from_matrix(out)
            }
            None => self.apply_scaled(rho),
        }
    }

    /// Action through the diagonal PTM: rescale each Pauli coefficient.
    pub fn apply_scaled(&self, rho: &Operator) -> Result<Operator> {
        let v = vectorize(rho);
        let coeffs = v
            .coeffs()
            .iter()
            .zip(&self.lambdas)
            .map(|(c, l)| c * *l)
            .collect();
        Ok(devectorize(&VectorizedOperator::new(self.n, coeffs)?))
    }
}

/// `λⱼ = Σₘ βₘ s(m, j)` with `s = +1` when `𝒫ₘ` and `𝒫ⱼ` commute and `−1`
/// otherwise. Each sum is accumulated with Neumaier compensation.
pub fn lambdas_from_probabilities(n: usize, probs: &[f64]) -> Vec<f64> {
    let strings: Vec<(usize, usize)> = PauliIndex::all(n)
        .expect("qubit count validated by caller")
        .map(|idx| {
            let s = idx.string();
            (s.x, s.z)
        })
        .collect();
    let support: Vec<(usize, f64)> = probs
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, b)| *b != 0.0)
        .collect();
    strings
        .par_iter()
        .map(|&(xj, zj)| {
            let mut sum = 0.0f64;
            let mut comp = 0.0f64;
            for &(m, b) in &support {
                let (xm, zm) = strings[m];
                let term = if ((xm & zj) ^ (zm & xj)).count_ones() % 2 == 0 {
                    b
                } else {
                    -b
                };
                let t = sum + term;
                if sum.abs() >= term.abs() {
                    comp += (sum - t) + term;
                } else {
                    comp += (term - t) + sum;
                }
                sum = t;
            }
            sum + comp
        })
        .collect()
}
