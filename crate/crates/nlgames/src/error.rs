//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} out of supported range [2, 2^62)")]
    ModulusRange(u64),
    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),
    #[error("field mismatch: F_{0} vs F_{1}")]
    FieldMismatch(u64, u64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("directions are linearly dependent")]
    DependentDirections,
    #[error("field too small: need at least {need} elements, have {have}")]
    FieldTooSmall { need: u64, have: u64 },
    #[error("degree {got} exceeds bound {bound}")]
    DegreeTooHigh { got: usize, bound: usize },
    #[error("interpolation grid incomplete: missing {0:?}")]
    GridIncomplete(Vec<u64>),
    #[error("enumeration of {0} items exceeds cap {1}")]
    TooLarge(u128, u128),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error("SDP did not converge within {iterations} iterations (gap {gap:.3e})")]
    Unsolved { iterations: usize, gap: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
