use thiserror::Error;

/// Errors raised by the numerical pipeline and the report writers.
#[derive(Debug, Error)]
pub enum ProxError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported quadrature degree {requested} (supported up to {supported})")]
    UnsupportedDegree { requested: usize, supported: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate amalgam: the product of the distinguished elements vanishes")]
    DegenerateAmalgam,

    #[error("missing constants for level {0}")]
    MissingConstants(usize),

    #[error("consistency violation: {0}")]
    ConsistencyViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ProxError>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(ProxError::DimensionMismatch { expected, found })
    }
}
