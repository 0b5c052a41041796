//! n-qubit Pauli basis, dense operators and the normalized Hilbert–Schmidt
//! geometry used by every other module.
//!
//! Basis elements are indexed lexicographically: the string
//! `σ_{α₁} ⊗ … ⊗ σ_{αₙ}` has flat index `k = Σ αᵢ·4^(n−i)`, so the first
//! qubit is the most significant base-4 digit. `σ₀ = 𝟙, σ₁ = X, σ₂ = Y, σ₃ = Z`.
//!
//! Every Pauli string is a signed permutation matrix: row `r` has exactly one
//! nonzero entry, in column `r ^ x_mask`. All routines here exploit that and
//! never materialize the full basis.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest qubit count supported for dense operators.
pub const MAX_QUBITS: usize = 6;

const LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCapExceeded { n, max: MAX_QUBITS });
    }
    Ok(())
}

/// Flat lexicographic index of an n-qubit Pauli string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliIndex {
    n: usize,
    k: usize,
}

impl PauliIndex {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_qubits(n)?;
        if k >= 1 << (2 * n) {
            return Err(Error::InvalidPauliIndex { n, k });
        }
        Ok(Self { n, k })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// Builds the index from per-qubit digits, first qubit first.
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let n = digits.len();
        check_qubits(n)?;
        let mut k = 0usize;
        for &d in digits {
            if d > 3 {
                return Err(Error::InvalidPauliLabel(format!("digit {d}")));
            }
            k = 4 * k + d as usize;
        }
        Ok(Self { n, k })
    }

    pub fn from_label(label: &str) -> Result<Self> {
        let digits = label
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(0),
                'X' => Ok(1),
                'Y' => Ok(2),
                'Z' => Ok(3),
                _ => Err(Error::InvalidPauliLabel(label.to_string())),
            })
            .collect::<Result<Vec<u8>>>()?;
        if digits.is_empty() {
            return Err(Error::InvalidPauliLabel(label.to_string()));
        }
        Self::from_digits(&digits)
    }

    /// Every index of the n-qubit basis, in lexicographic order.
    pub fn all(n: usize) -> Result<impl Iterator<Item = PauliIndex>> {
        check_qubits(n)?;
        Ok((0..1usize << (2 * n)).map(move |k| PauliIndex { n, k }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> usize {
        self.k
    }

    pub fn is_identity(&self) -> bool {
        self.k == 0
    }

    pub fn digits(&self) -> Vec<u8> {
        (0..self.n)
            .map(|i| ((self.k >> (2 * (self.n - 1 - i))) & 3) as u8)
            .collect()
    }

    pub fn label(&self) -> String {
        self.digits().iter().map(|&d| LABELS[d as usize]).collect()
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        self.digits().iter().filter(|&&d| d != 0).count()
    }

    pub(crate) fn string(&self) -> PauliString {
        PauliString::from_index(*self)
    }

    /// Whether the two Pauli strings commute.
    pub fn commutes_with(&self, other: &PauliIndex) -> bool {
        let a = self.string();
        let b = other.string();
        ((a.x & b.z) ^ (a.z & b.x)).count_ones().is_multiple_of(2)
    }
}

impl fmt::Display for PauliIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PauliIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_label(s)
    }
}

/// Symplectic form of a Pauli string: bit `n-1-i` of the masks refers to
/// qubit `i` (first qubit is the most significant bit of a row index).
#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliString {
    pub x: usize,
    pub z: usize,
    /// `i^(number of Y factors)`.
    pub phase: Complex64,
}

impl PauliString {
    fn from_index(idx: PauliIndex) -> Self {
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (i, d) in idx.digits().into_iter().enumerate() {
            let bit = 1usize << (idx.n - 1 - i);
            match d {
                1 => x |= bit,
                2 => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
                3 => z |= bit,
                _ => {}
            }
        }
        let phase = match ny % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Self { x, z, phase }
    }

    /// Column and value of the single nonzero entry in row `r`.
    #[inline]
    pub fn entry(&self, r: usize) -> (usize, Complex64) {
        let c = r ^ self.x;
        if (c & self.z).count_ones().is_multiple_of(2) {
            (c, self.phase)
        } else {
            (c, -self.phase)
        }
    }
}

/// Dense `d × d` complex operator on `n` qubits, `d = 2ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    n: usize,
    mat: DMatrix<Complex64>,
}

impl Operator {
    /// Wraps a square matrix whose side is `2ⁿ` for a supported `n`.
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        let d = mat.nrows();
        if mat.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: mat.ncols(),
            });
        }
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "operator side {d} is not a power of two"
            )));
        }
        let n = d.trailing_zeros() as usize;
        check_qubits(n)?;
        Ok(Self { n, mat })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let mut mat = DMatrix::zeros(d, d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                mat[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        Self::from_matrix(mat)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let d = 1 << n;
        Ok(Self {
            n,
            mat: DMatrix::zeros(d, d),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let d = 1 << n;
        Ok(Self {
            n,
            mat: DMatrix::identity(d, d),
        })
    }

    /// `𝟙/d`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let mut op = Self::identity(n)?;
        let d = op.dim() as f64;
        op.mat /= Complex64::new(d, 0.0);
        Ok(op)
    }

    /// Projector `|b⟩⟨b|` on a computational basis state.
    pub fn basis_projector(n: usize, b: usize) -> Result<Self> {
        let mut op = Self::zeros(n)?;
        if b >= op.dim() {
            return Err(Error::InvalidParameter(format!(
                "basis state {b} out of range for {n} qubit(s)"
            )));
        }
        op.mat[(b, b)] = Complex64::new(1.0, 0.0);
        Ok(op)
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure_state(amplitudes: &[Complex64]) -> Result<Self> {
        let d = amplitudes.len();
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let mut mat = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = amplitudes[i] * amplitudes[j].conj() / norm;
            }
        }
        Self::from_matrix(mat)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn dagger(&self) -> Self {
        Self {
            n: self.n,
            mat: self.mat.adjoint(),
        }
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev = 0.0f64;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.n, other.n, "operator sizes differ");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn kron(&self, other: &Operator) -> Result<Self> {
        check_qubits(self.n + other.n)?;
        Ok(Self {
            n: self.n + other.n,
            mat: self.mat.kronecker(&other.mat),
        })
    }

    pub fn mul(&self, other: &Operator) -> Result<Self> {
        self.same_size(other)?;
        Ok(Self {
            n: self.n,
            mat: &self.mat * &other.mat,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.same_size(other)?;
        Ok(Self {
            n: self.n,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            mat: &self.mat * c,
        }
    }

    pub(crate) fn same_size(&self, other: &Operator) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// `P A P` for the Pauli string `idx` (P is Hermitian).
    pub(crate) fn conjugate_by_pauli(&self, idx: PauliIndex) -> Self {
        let p = idx.string();
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for a in 0..d {
            let (ca, va) = p.entry(a);
            for b in 0..d {
                // P[b^x, b] = conj(P[b, b^x]) for a Hermitian P.
                let (cb, vb) = p.entry(b);
                out[(a, b)] = va * self.mat[(ca, cb)] * vb.conj();
            }
        }
        Self { n: self.n, mat: out }
    }

    /// `Tr[𝒫ₖ A]` in `O(d)`.
    pub fn pauli_trace(&self, idx: PauliIndex) -> Complex64 {
        debug_assert_eq!(idx.n(), self.n);
        let p = idx.string();
        (0..self.dim())
            .map(|r| {
                let (c, v) = p.entry(r);
                v * self.mat[(c, r)]
            })
            .sum()
    }
}

/// Dense matrix of the Pauli string `idx`.
pub fn pauli_element(idx: PauliIndex) -> Operator {
    let d = 1usize << idx.n();
    let p = idx.string();
    let mut mat = DMatrix::zeros(d, d);
    for r in 0..d {
        let (c, v) = p.entry(r);
        mat[(r, c)] = v;
    }
    Operator { n: idx.n(), mat }
}

/// Normalized Hilbert–Schmidt inner product `Tr[A†B]/d`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<Complex64> {
    a.same_size(b)?;
    let s: Complex64 = a
        .mat
        .iter()
        .zip(b.mat.iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(s / a.dim() as f64)
}

/// Coefficients of an operator over the Pauli basis, `Aₖ = ⟨⟨k|A⟩⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedOperator {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl VectorizedOperator {
    pub fn new(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        let len = 1 << (2 * n);
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: coeffs.len(),
            });
        }
        Ok(Self { n, coeffs })
    }

    pub fn from_real(n: usize, coeffs: &[f64]) -> Result<Self> {
        Self::new(n, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, idx: PauliIndex) -> Complex64 {
        self.coeffs[idx.index()]
    }

    pub fn max_imaginary(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Real parts; the caller decides whether the imaginary residue matters.
    pub fn real_parts(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.re).collect()
    }
}

/// Projects `A` onto the Pauli basis.
pub fn vectorize(a: &Operator) -> VectorizedOperator {
    let d = a.dim() as f64;
    let coeffs = PauliIndex::all(a.n())
        .expect("operator qubit count already validated")
        .map(|idx| a.pauli_trace(idx) / d)
        .collect();
    VectorizedOperator { n: a.n(), coeffs }
}

/// `Σₖ Aₖ 𝒫ₖ`.
pub fn devectorize(v: &VectorizedOperator) -> Operator {
    let d = 1usize << v.n;
    let mut mat = DMatrix::zeros(d, d);
    for (k, &c) in v.coeffs.iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let p = PauliIndex { n: v.n, k }.string();
        for r in 0..d {
            let (col, val) = p.entry(r);
            mat[(r, col)] += c * val;
        }
    }
    Operator { n: v.n, mat }
}
