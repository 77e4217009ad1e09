use thiserror::Error;

/// Errors produced by lattice construction, discretization and spectral evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index out of range: {index} (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("lattice size overflow: {n_tilde}^{m} exceeds usize")]
    LatticeOverflow { n_tilde: usize, m: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target array is not a bijection: linear index {index} hit twice")]
    NotABijection { index: usize },

    #[error("observable length {got} does not match cell count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unknown builtin name: {0}")]
    UnknownName(String),

    #[error("unsupported oracle instance: {0}")]
    UnsupportedOracle(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
