use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coordinate {value} is outside [-1, 1]")]
    Domain { value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis of size {size} exceeds the cap of {cap} functions")]
    BasisTooLarge { size: u128, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("invalid bound {0}: must lie in [0, 1]")]
    InvalidBound(f64),

    #[error("degenerate variance: {0}")]
    Degenerate(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("objective returned non-finite value {value} at x = {x:?}")]
    NonFiniteObjective { x: Vec<f64>, value: f64 },

    #[error("unknown test function `{0}`")]
    UnknownObjective(String),
}

pub type Result<T> = std::result::Result<T, Error>;
