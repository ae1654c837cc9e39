//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric within tolerance {tol:e}")]
    NotSymmetric { tol: f64 },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("variance bound inapplicable: q = {q} >= 1")]
    BoundInapplicable { q: f64 },

    #[error("staleness bound K = {k} exceeds vertex-enumeration cap {cap}")]
    StalenessTooLarge { k: usize, cap: usize },

    #[error("singular linear system")]
    SingularSystem,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
