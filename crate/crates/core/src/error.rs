//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    #[error("scenario too large: word set would have {words} members, cap is {cap}")]
    ScenarioTooLarge { words: u128, cap: usize },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e} below -{tol:.1e}")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("marginal ill-defined: non-signalling violation {violation:.3e} above tolerance {tol:.1e}")]
    IllDefinedMarginal { violation: f64, tol: f64 },

    #[error("solver failure after {iters} iterations: {reason} (gap {gap:.3e}, residual {residual:.3e})")]
    SolverFailure {
        iters: usize,
        reason: String,
        gap: f64,
        residual: f64,
    },

    #[error("inconsistent moment matrix: {0}")]
    InconsistentMomentMatrix(String),

    #[error("lift inconsistency: {0}")]
    LiftInconsistency(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
