use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("L^p exponent must satisfy p >= 1 (got {0})")]
    InvalidExponent(f64),

    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("operator is not a projection (defect {0:e})")]
    NotProjection(f64),

    #[error("operator is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("invalid dynamics: {0}")]
    InvalidDynamics(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A hypothesis of an experiment (ergodicity, weak mixing, multiplicativity)
    /// does not hold for the supplied dynamics.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
