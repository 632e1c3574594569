use thiserror::Error;

/// Errors raised across the lab.
#[derive(Debug, Error)]
pub enum LabError {
    /// Shapes or indices that do not line up (policy vs. horizon, matrix sizes, ...).
    #[error("structural error: {0}")]
    Structural(String),
    /// Inputs that are well-formed but unusable for the requested operation.
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn structural(msg: impl Into<String>) -> LabError {
    LabError::Structural(msg.into())
}

pub(crate) fn configuration(msg: impl Into<String>) -> LabError {
    LabError::Configuration(msg.into())
}
