//! Pauli-transfer-matrix tools for multiqubit noise: channel construction,
//! noise deconvolution of expectation values, channel characterization from
//! probe states, and a density-matrix simulator to drive experiments.

pub mod channels;
pub mod cli;
pub mod characterization;
pub mod deconvolution;
pub mod error;
pub mod observable;
pub mod pauli;
pub mod sampling;
pub mod simulator;
pub mod textio;

pub use error::{Error, Result};
