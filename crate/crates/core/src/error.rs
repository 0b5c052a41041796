use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count {n} outside supported range 1..={max}")]
    QubitCapExceeded { n: usize, max: usize },

    #[error("Pauli index {k} out of range for {n} qubit(s)")]
    InvalidPauliIndex { n: usize, k: usize },

    #[error("invalid Pauli label {0:?}")]
    InvalidPauliLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("channel is not trace preserving (max deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("correlation parameter mu = {0} outside [0, 1]")]
    InvalidCorrelation(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel not invertible at Pauli component {label} (|lambda| = {lambda:e})")]
    NonInvertibleChannel { label: String, lambda: f64 },

    #[error("Pauli transfer matrix is singular (1-norm condition number {condition:e})")]
    SingularPtm { condition: f64 },

    #[error("missing measurement for Pauli component {0}")]
    MissingMeasurement(String),

    #[error("missing characterized PTM entry ({row}, {col})")]
    MissingPtmEntry { row: String, col: String },

    #[error("the identity needs no probe state (Gamma_00 = 1 by trace preservation)")]
    IdentityProbe,

    #[error("channel is not unital: |Tr[P_{label} Phi(1/d)]| = {residual:e}")]
    NonUnitalChannel { label: String, residual: f64 },

    #[error("state is not positive semidefinite (smallest S_m = {min_coefficient:e})")]
    NotPositiveSemidefinite { min_coefficient: f64 },

    #[error("state trace is {0}, expected 1")]
    NotUnitTrace(f64),

    #[error("expectation value {0} outside [-1, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
