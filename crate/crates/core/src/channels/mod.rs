//! Quantum channels in Kraus, full-PTM and Pauli-diagonal form.

mod config;
mod diagonal;
mod families;
mod kraus;
mod ptm;

pub use config::ChannelConfig;
pub(crate) use config::toml_error;
pub use diagonal::{lambdas_from_probabilities, PauliDiagonalChannel};
pub use families::{
    amplitude_damping, amplitude_damping_ops, bit_flip_channel, correlated_amplitude_damping,
    correlated_pauli_channel, correlated_pauli_diagonal, correlated_pauli_weights,
    dephasing_channel, depolarizing_channel, PauliProbabilities,
};
pub use kraus::{ptm_from_kraus, KrausChannel, TRACE_PRESERVING_TOL};
pub use ptm::{Ptm, DIAGONAL_TOL, MAX_FULL_PTM_QUBITS};

use std::borrow::Cow;

use crate::error::Result;
use crate::pauli::{Operator, PauliIndex};

/// Anything that maps density matrices to density matrices. Characterization
/// only ever talks to a channel through this trait.
pub trait QuantumMap: Sync {
    fn n(&self) -> usize;
    fn apply(&self, rho: &Operator) -> Result<Operator>;
}

/// A channel in its native representation.
#[derive(Clone, Debug)]
pub enum Channel {
    Kraus(KrausChannel),
    Ptm(Ptm),
    PauliDiagonal(PauliDiagonalChannel),
}

impl Channel {
    pub fn n(&self) -> usize {
        match self {
            Channel::Kraus(c) => c.n(),
            Channel::Ptm(p) => p.n(),
            Channel::PauliDiagonal(c) => c.n(),
        }
    }

    /// `Φ(ρ)` in the native representation.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        match self {
            Channel::Kraus(c) => c.apply(rho),
            Channel::Ptm(p) => p.apply(rho),
            Channel::PauliDiagonal(c) => c.apply(rho),
        }
    }

    /// `Φ(ρ)` through `Γ·|ρ⟩⟩`.
    pub fn apply_via_ptm(&self, rho: &Operator) -> Result<Operator> {
        match self {
            Channel::PauliDiagonal(c) => c.apply_scaled(rho),
            _ => self.ptm()?.apply(rho),
        }
    }

    pub fn ptm(&self) -> Result<Cow<'_, Ptm>> {
        match self {
            Channel::Kraus(c) => c.ptm().map(Cow::Borrowed),
            Channel::Ptm(p) => Ok(Cow::Borrowed(p)),
            Channel::PauliDiagonal(c) => c.to_ptm().map(Cow::Owned),
        }
    }

    pub fn as_diagonal(&self) -> Option<&PauliDiagonalChannel> {
        match self {
            Channel::PauliDiagonal(c) => Some(c),
            _ => None,
        }
    }

    /// Diagonal form when the channel's PTM is diagonal. Kraus and full-PTM
    /// channels are inspected numerically.
    pub fn to_diagonal(&self) -> Result<Option<PauliDiagonalChannel>> {
        match self {
            Channel::PauliDiagonal(c) => Ok(Some(c.clone())),
            other => {
                let ptm = other.ptm()?;
                if ptm.is_diagonal() {
                    Ok(Some(PauliDiagonalChannel::from_lambdas(ptm.n(), ptm.diagonal())?))
                } else {
                    Ok(None)
                }
            }
        }
    }

    pub fn diagonal_entry(&self, k: PauliIndex) -> Result<f64> {
        match self {
            Channel::PauliDiagonal(c) => Ok(c.lambda(k)),
            other => Ok(other.ptm()?.entry(k, k)),
        }
    }
}

impl From<KrausChannel> for Channel {
    fn from(c: KrausChannel) -> Self {
        Channel::Kraus(c)
    }
}

impl From<Ptm> for Channel {
    fn from(p: Ptm) -> Self {
        Channel::Ptm(p)
    }
}

impl From<PauliDiagonalChannel> for Channel {
    fn from(c: PauliDiagonalChannel) -> Self {
        Channel::PauliDiagonal(c)
    }
}

impl QuantumMap for Channel {
    fn n(&self) -> usize {
        Channel::n(self)
    }

    fn apply(&self, rho: &Operator) -> Result<Operator> {
        Channel::apply(self, rho)
    }
}

impl QuantumMap for KrausChannel {
    fn n(&self) -> usize {
        KrausChannel::n(self)
    }

    fn apply(&self, rho: &Operator) -> Result<Operator> {
        KrausChannel::apply(self, rho)
    }
}

impl QuantumMap for PauliDiagonalChannel {
    fn n(&self) -> usize {
        PauliDiagonalChannel::n(self)
    }

    fn apply(&self, rho: &Operator) -> Result<Operator> {
        PauliDiagonalChannel::apply(self, rho)
    }
}

impl QuantumMap for Ptm {
    fn n(&self) -> usize {
        Ptm::n(self)
    }

    fn apply(&self, rho: &Operator) -> Result<Operator> {
        Ptm::apply(self, rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::hs_inner;
    use num_complex::Complex64;

    fn random_operator(n: usize, seed: u64) -> Operator {
        // Small LCG; the tests only need deterministic, unstructured entries.
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let d = 1 << n;
        let data: Vec<Complex64> = (0..d * d).map(|_| Complex64::new(next(), next())).collect();
        Operator::from_matrix(nalgebra::DMatrix::from_row_slice(d, d, &data)).unwrap()
    }

    #[test]
    fn depolarizing_full_strength_collapses_to_mixed() {
        let ch: Channel = depolarizing_channel(1, 1.0, 0.0).unwrap().into();
        let rho = Operator::basis_projector(1, 1).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert!(out.max_abs_diff(&Operator::maximally_mixed(1).unwrap()) < 1e-15);
    }

    #[test]
    fn adjoint_identity_for_amplitude_damping() {
        let ch = amplitude_damping(0.37).unwrap();
        let ptm = ch.ptm().unwrap().clone();
        let adj = ptm.adjoint();
        for seed in 0..5 {
            let a = random_operator(1, seed);
            let b = random_operator(1, seed + 100);
            let lhs = hs_inner(&ch.apply(&a).unwrap(), &b).unwrap();
            let rhs = hs_inner(&a, &adj.apply(&b).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn to_diagonal_detects_structure() {
        let bf: Channel = bit_flip_channel(2, 0.1, 0.3).unwrap().into();
        assert!(bf.to_diagonal().unwrap().is_some());
        let ad: Channel = correlated_amplitude_damping(0.5, 0.5).unwrap().into();
        assert!(ad.to_diagonal().unwrap().is_none());
    }
}
