//! Sparse real expansions of operators over the Pauli basis.
//!
//! Text format, one term per line:
//!
//! ```text
//! # comments and blank lines are ignored
//! ZZZ 1.0
//! IZ -0.5
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{check_qubits, devectorize, vectorize, Operator, PauliIndex, VectorizedOperator};
use crate::textio::{fmt_f64, parse_f64, tokens};

/// Hermiticity tolerance for operators projected onto the basis.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Coefficients at or below this magnitude are dropped.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-14;

/// `O = Σₖ Oₖ 𝒫ₖ` with only the nonzero coefficients stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    n: usize,
    terms: BTreeMap<PauliIndex, f64>,
}

impl Observable {
    pub fn new(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self {
            n,
            terms: BTreeMap::new(),
        })
    }

    /// Sums duplicate indices and prunes zeros.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (PauliIndex, f64)>) -> Result<Self> {
        let mut obs = Self::new(n)?;
        for (idx, c) in terms {
            if idx.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: idx.n(),
                });
            }
            *obs.terms.entry(idx).or_insert(0.0) += c;
        }
        obs.prune(DEFAULT_PRUNE_TOL);
        Ok(obs)
    }

    /// A single basis element with unit coefficient.
    pub fn pauli(idx: PauliIndex) -> Self {
        Self {
            n: idx.n(),
            terms: BTreeMap::from([(idx, 1.0)]),
        }
    }

    pub fn from_labels<'a>(terms: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let parsed = terms
            .into_iter()
            .map(|(l, c)| Ok((PauliIndex::from_label(l)?, c)))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed
            .first()
            .map(|(idx, _)| idx.n())
            .ok_or_else(|| Error::InvalidParameter("observable has no terms".into()))?;
        Self::from_terms(n, parsed)
    }

    /// Projects a Hermitian operator onto the basis.
    pub fn from_operator(a: &Operator, prune_tol: f64) -> Result<Self> {
        let deviation = a.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { deviation });
        }
        let v = vectorize(a);
        let terms = PauliIndex::all(a.n())?
            .zip(v.coeffs())
            .filter(|(_, c)| c.re.abs() > prune_tol)
            .map(|(idx, c)| (idx, c.re))
            .collect();
        Ok(Self { n: a.n(), terms })
    }

    fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.abs() > tol);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nonzero components.
    pub fn r(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &BTreeMap<PauliIndex, f64> {
        &self.terms
    }

    pub fn coefficient(&self, idx: PauliIndex) -> f64 {
        self.terms.get(&idx).copied().unwrap_or(0.0)
    }

    pub fn to_vectorized(&self) -> VectorizedOperator {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 1 << (2 * self.n)];
        for (idx, &c) in &self.terms {
            coeffs[idx.index()] = Complex64::new(c, 0.0);
        }
        VectorizedOperator::new(self.n, coeffs).expect("qubit count validated")
    }

    pub fn to_operator(&self) -> Operator {
        devectorize(&self.to_vectorized())
    }

    /// `Tr[ρO]`.
    pub fn expectation(&self, rho: &Operator) -> Result<f64> {
        if rho.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                found: rho.dim(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(idx, c)| c * rho.pauli_trace(*idx).re)
            .sum())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let Some(toks) = tokens(line) else { continue };
            if toks.len() != 2 {
                let col = toks.get(2).map_or(toks[0].column, |t| t.column);
                return Err(Error::parse(
                    line_no,
                    col,
                    "expected `<pauli-string> <coefficient>`",
                ));
            }
            let idx = PauliIndex::from_label(toks[0].text)
                .map_err(|e| Error::parse(line_no, toks[0].column, e.to_string()))?;
            match n {
                None => n = Some(idx.n()),
                Some(m) if m != idx.n() => {
                    return Err(Error::parse(
                        line_no,
                        toks[0].column,
                        format!("expected a {m}-qubit Pauli string"),
                    ))
                }
                _ => {}
            }
            terms.push((idx, parse_f64(&toks[1], line_no)?));
        }
        let n = n.ok_or_else(|| Error::parse(1, 1, "observable has no terms"))?;
        Self::from_terms(n, terms)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, c) in &self.terms {
            writeln!(f, "{} {}", idx.label(), fmt_f64(*c))?;
        }
        Ok(())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
