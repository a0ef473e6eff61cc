//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown velocity set size {requested}; available sizes: {available:?}")]
    UnknownVelocitySetSize {
        requested: usize,
        available: Vec<usize>,
    },

    #[error("malformed velocity table {path}: {detail}")]
    MalformedVelocityTable { path: String, detail: String },

    #[error("invalid configuration: {field}: {detail}")]
    InvalidConfig { field: String, detail: String },

    #[error("unknown problem '{0}'; catalog: {1:?}")]
    UnknownProblem(String, Vec<String>),

    #[error("numerical failure at step {step}: {detail}")]
    NumericalFailure { step: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code category: 2 for configuration errors, 3 for
    /// numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. }
            | Error::UnknownProblem(..)
            | Error::UnknownVelocitySetSize { .. } => 2,
            Error::NumericalFailure { .. } => 3,
            _ => 1,
        }
    }
}
