use thiserror::Error;

#[derive(Debug, Error)]
pub enum EaError {
    #[error(transparent)]
    Core(#[from] ea_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, EaError>;
