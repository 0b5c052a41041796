use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::{check_qubits, devectorize, vectorize, Operator, PauliIndex, VectorizedOperator};

/// Largest qubit count for which a full `d² × d²` matrix is built.
pub const MAX_FULL_PTM_QUBITS: usize = 5;
/// Off-diagonal magnitude below which a PTM counts as diagonal.
pub const DIAGONAL_TOL: f64 = 1e-12;

pub(crate) fn check_full_ptm_qubits(n: usize) -> Result<()> {
    check_qubits(n)?;
    if n > MAX_FULL_PTM_QUBITS {
        return Err(Error::QubitCapExceeded {
            n,
            max: MAX_FULL_PTM_QUBITS,
        });
    }
    Ok(())
}

/// Pauli transfer matrix `Γⱼq = Tr[𝒫ⱼ Φ(𝒫q)]/d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ptm {
    n: usize,
    matrix: DMatrix<f64>,
}

impl Ptm {
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        check_full_ptm_qubits(n)?;
        let side = 1 << (2 * n);
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("PTM has non-finite entries".into()));
        }
        Ok(Self { n, matrix })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_full_ptm_qubits(n)?;
        let side = 1 << (2 * n);
        Ok(Self {
            n,
            matrix: DMatrix::identity(side, side),
        })
    }

    pub fn from_diagonal(n: usize, lambdas: &[f64]) -> Result<Self> {
        check_full_ptm_qubits(n)?;
        let side = 1 << (2 * n);
        if lambdas.len() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: lambdas.len(),
            });
        }
        Ok(Self {
            n,
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(lambdas)),
        })
    }

    /// Builds the PTM of an arbitrary linear map by evaluating it on every
    /// basis element. Entries whose imaginary residue exceeds `1e-10` are
    /// rejected.
    pub fn from_map<F>(n: usize, map: F) -> Result<Self>
    where
        F: Fn(&Operator) -> Result<Operator> + Sync,
    {
        check_full_ptm_qubits(n)?;
        let side = 1usize << (2 * n);
        let columns: Vec<VectorizedOperator> = PauliIndex::all(n)?
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|q| map(&crate::pauli::pauli_element(q)).map(|out| vectorize(&out)))
            .collect::<Result<_>>()?;
        let mut matrix = DMatrix::zeros(side, side);
        for (q, col) in columns.iter().enumerate() {
            if col.max_imaginary() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "map output has imaginary Pauli coefficients ({:e})",
                    col.max_imaginary()
                )));
            }
            for (j, c) in col.coeffs().iter().enumerate() {
                matrix[(j, q)] = c.re;
            }
        }
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, j: PauliIndex, q: PauliIndex) -> f64 {
        self.matrix[(j.index(), q.index())]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let side = self.side();
        let mut m = 0.0f64;
        for j in 0..side {
            for i in 0..side {
                if i != j {
                    m = m.max(self.matrix[(i, j)].abs());
                }
            }
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        self.max_off_diagonal() < DIAGONAL_TOL
    }

    /// Deviation of the first row from `(1, 0, …, 0)`.
    pub fn trace_preservation_residual(&self) -> f64 {
        self.matrix
            .row(0)
            .iter()
            .enumerate()
            .map(|(q, &v)| (v - if q == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// Deviation of the first column from `(1, 0, …, 0)ᵀ`.
    pub fn unitality_residual(&self) -> f64 {
        self.matrix
            .column(0)
            .iter()
            .enumerate()
            .map(|(j, &v)| (v - if j == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// PTM of the adjoint map.
    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            matrix: self.matrix.transpose(),
        }
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &Ptm) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.side(),
                found: other.side(),
            });
        }
        Ok(Self {
            n: self.n,
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// m-fold composition; `m = 0` gives the identity.
    pub fn power(&self, m: u32) -> Self {
        let mut result = DMatrix::identity(self.side(), self.side());
        let mut base = self.matrix.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self {
            n: self.n,
            matrix: result,
        }
    }

    /// PTM of the tensor product channel `self ⊗ other`.
    pub fn kron(&self, other: &Ptm) -> Result<Self> {
        check_full_ptm_qubits(self.n + other.n)?;
        Ok(Self {
            n: self.n + other.n,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// `Φ(A)` through `Γ·|A⟩⟩`.
    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                found: a.dim(),
            });
        }
        let v = vectorize(a);
        let side = self.side();
        let coeffs = (0..side)
            .map(|j| {
                self.matrix
                    .row(j)
                    .iter()
                    .zip(v.coeffs())
                    .map(|(g, c)| c * *g)
                    .sum::<Complex64>()
            })
            .collect();
        Ok(devectorize(&VectorizedOperator::new(self.n, coeffs)?))
    }

    pub fn max_abs_diff(&self, other: &Ptm) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_zero_is_identity() {
        let p = Ptm::from_diagonal(1, &[1.0, 0.5, 0.5, 0.2]).unwrap();
        assert_eq!(p.power(0), Ptm::identity(1).unwrap());
        assert_eq!(p.power(3).diagonal(), vec![1.0, 0.125, 0.125, 0.2f64.powi(3)]);
    }

    #[test]
    fn adjoint_of_diagonal_is_itself() {
        let p = Ptm::from_diagonal(1, &[1.0, 0.9, 0.8, 0.7]).unwrap();
        assert_eq!(p.adjoint(), p);
        assert!(p.is_diagonal());
    }

    #[test]
    fn caps_and_shapes() {
        assert!(matches!(
            Ptm::identity(6),
            Err(Error::QubitCapExceeded { n: 6, max: 5 })
        ));
        assert!(Ptm::from_matrix(1, DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn residuals() {
        let id = Ptm::identity(2).unwrap();
        assert_eq!(id.trace_preservation_residual(), 0.0);
        assert_eq!(id.unitality_residual(), 0.0);
        assert_eq!(id.max_off_diagonal(), 0.0);
    }
}
