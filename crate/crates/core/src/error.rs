use thiserror::Error;

/// Errors raised by the fitting, sampling and evaluation routines.
#[derive(Debug, Error)]
pub enum SparError {
    /// An argument is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Matrix or vector shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A value lies outside the mean or response domain of the family.
    #[error("domain error at index {index}: {reason}")]
    Domain { index: usize, reason: String },

    /// A computation produced a non-finite value or a factorization failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The response carries no information (constant, or zero null deviance).
    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    /// The screening coefficient is identically zero.
    #[error("screening coefficient has no signal (all entries zero)")]
    SignalAbsent,

    /// A metric is not defined for the given inputs (zero denominator, one class only).
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed input data (bad header, non-numeric cell, missing column).
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, SparError>;

impl SparError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        SparError::Parameter(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        SparError::Dimension(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        SparError::Numerical(msg.into())
    }
}
