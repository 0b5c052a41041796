use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::ptm::{check_full_ptm_qubits, Ptm};
use crate::error::{Error, Result};
use crate::pauli::{Operator, PauliIndex};

/// Trace-preservation tolerance on `Σ K†K = 𝟙`.
pub const TRACE_PRESERVING_TOL: f64 = 1e-10;

/// Channel in Kraus form, `Φ(ρ) = Σᵢ KᵢρKᵢ†`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    n: usize,
    ops: Vec<Operator>,
    ptm: OnceLock<Ptm>,
}

impl KrausChannel {
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        let n = first.n();
        if let Some(bad) = ops.iter().find(|k| k.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: bad.dim(),
            });
        }
        let d = 1 << n;
        let mut sum = DMatrix::<Complex64>::zeros(d, d);
        for k in &ops {
            sum += k.matrix().adjoint() * k.matrix();
        }
        let deviation = (sum - DMatrix::<Complex64>::identity(d, d))
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if deviation > TRACE_PRESERVING_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self {
            n,
            ops,
            ptm: OnceLock::new(),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![Operator::identity(n)?])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kraus_ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                found: rho.dim(),
            });
        }
        let d = rho.dim();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for k in &self.ops {
            out += k.matrix() * rho.matrix() * k.matrix().adjoint();
        }
        Operator::from_matrix(out)
    }

    /// Kraus form of `other ∘ self` (`self` acts first).
    pub fn then(&self, other: &KrausChannel) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                found: 1 << other.n,
            });
        }
        let ops = other
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b.mul(a)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    /// Pauli transfer matrix, computed once and cached.
    pub fn ptm(&self) -> Result<&Ptm> {
        if let Some(p) = self.ptm.get() {
            return Ok(p);
        }
        let computed = ptm_from_kraus(self)?;
        Ok(self.ptm.get_or_init(|| computed))
    }
}

/// `Γⱼq = Tr[𝒫ⱼ Σᵢ Kᵢ𝒫qKᵢ†]/d`, evaluated through the row-major
/// superoperator `S = Σᵢ Kᵢ ⊗ conj(Kᵢ)` and the signed-permutation structure
/// of the Pauli strings.
pub fn ptm_from_kraus(ch: &KrausChannel) -> Result<Ptm> {
    let n = ch.n;
    check_full_ptm_qubits(n)?;
    let d = 1usize << n;
    let side = d * d;
    let mut sup = DMatrix::<Complex64>::zeros(side, side);
    for k in &ch.ops {
        sup += k.matrix().kronecker(&k.matrix().conjugate());
    }
    let strings: Vec<_> = PauliIndex::all(n)?.map(|idx| idx.string()).collect();
    let rows: Vec<Vec<f64>> = strings
        .par_iter()
        .map(|pj| {
            strings
                .iter()
                .map(|pq| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..d {
                        let (cj, vj) = pj.entry(r);
                        // Y[cj, r] with Y = Φ(𝒫q).
                        let row = cj * d + r;
                        let mut inner = Complex64::new(0.0, 0.0);
                        for e in 0..d {
                            let (cq, vq) = pq.entry(e);
                            inner += sup[(row, e * d + cq)] * vq;
                        }
                        acc += vj * inner;
                    }
                    acc.re / d as f64
                })
                .collect()
        })
        .collect();
    let mut matrix = DMatrix::zeros(side, side);
    for (j, row) in rows.into_iter().enumerate() {
        for (q, v) in row.into_iter().enumerate() {
            matrix[(j, q)] = v;
        }
    }
    Ptm::from_matrix(n, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::pauli_element;

    fn bit_flip(p: f64) -> KrausChannel {
        let id = Operator::identity(1).unwrap();
        let x = pauli_element(PauliIndex::from_label("X").unwrap());
        KrausChannel::new(vec![
            id.scale(Complex64::new((1.0 - p).sqrt(), 0.0)),
            x.scale(Complex64::new(p.sqrt(), 0.0)),
        ])
        .unwrap()
    }

    #[test]
    fn identity_channel_has_identity_ptm() {
        for n in 1..=3 {
            let ch = KrausChannel::identity(n).unwrap();
            assert_eq!(ch.ptm().unwrap(), &Ptm::identity(n).unwrap());
        }
    }

    #[test]
    fn bit_flip_ptm_diagonal() {
        let ch = bit_flip(0.1);
        let ptm = ch.ptm().unwrap();
        let diag = ptm.diagonal();
        let expected = [1.0, 1.0, 0.8, 0.8];
        for (a, b) in diag.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(ptm.is_diagonal());
    }

    #[test]
    fn bit_flip_half_maps_zero_to_mixed() {
        let out = bit_flip(0.5)
            .apply(&Operator::basis_projector(1, 0).unwrap())
            .unwrap();
        assert!(out.max_abs_diff(&Operator::maximally_mixed(1).unwrap()) < 1e-15);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let half = Operator::identity(1)
            .unwrap()
            .scale(Complex64::new(0.5, 0.0));
        assert!(matches!(
            KrausChannel::new(vec![half]),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn composition_multiplies_ptms() {
        let a = bit_flip(0.1);
        let b = bit_flip(0.3);
        let ab = a.then(&b).unwrap();
        let expected = b.ptm().unwrap().compose(a.ptm().unwrap()).unwrap();
        assert!(ab.ptm().unwrap().max_abs_diff(&expected) < 1e-14);
    }
}
