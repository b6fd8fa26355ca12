use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dilation must be at least 1")]
    InvalidDilation,

    #[error("operation requires a finitely supported sequence")]
    NotFinitelySupported,

    #[error("operation requires a scalar (dim 1) sequence, got dim {0}")]
    NotScalar(usize),

    #[error("input window does not cover time {0}")]
    InsufficientWindow(i64),

    #[error("support radius {radius} exceeds receptive field {limit} (l^K - 1)")]
    SupportExceedsReceptiveField { radius: usize, limit: usize },

    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("effective number of filters {0} is below 1; bound undefined")]
    TooFewFilters(f64),

    #[error("bound is vacuous: {0}")]
    VacuousBound(String),

    #[error("transition matrix has spectral radius {0} >= 1")]
    Unstable(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
