use thiserror::Error;

/// Errors raised by lattice, special-function and transform operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} outside lattice window [{n_min}, {n_max}]")]
    Index { index: i64, n_min: i32, n_max: i32 },

    #[error("non-finite intermediate value: {0}")]
    Overflow(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("admissibility: {0}")]
    Admissibility(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
