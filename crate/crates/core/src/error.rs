use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix data has {len} entries, expected {dim}x{dim}")]
    BadShape { dim: usize, len: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("non-finite value at entry {index}")]
    NonFinite { index: usize },

    #[error("zero vector cannot be normalized or projected on")]
    ZeroVector,

    #[error("operator `{label}` is not a projector: {reason}")]
    NotProjector { label: String, reason: String },

    #[error("invalid frame `{label}`: {reason}")]
    InvalidFrame { label: String, reason: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error("history enumeration would produce {requested} histories (limit {limit})")]
    BudgetExceeded { requested: u128, limit: u64 },

    #[error("conditioning on a record of zero probability (norm {norm:e})")]
    ZeroNorm { norm: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("eigendecomposition did not converge")]
    Eigen,

    #[error("{0}")]
    Argument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
