//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by constructors and numeric kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix or state dimensions do not match.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A density matrix violates one of its invariants.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// Probabilities were negative or did not normalize.
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    /// A configuration string or file could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure while reading tabulated data.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
