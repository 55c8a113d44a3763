use thiserror::Error;

#[derive(Debug, Error)]
pub enum LwError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside grid extent: {0}")]
    OutOfExtent(String),

    #[error("{nodes} nodes exceeds the dense-matrix limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("unsupported symbol: {0}")]
    UnsupportedSymbol(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("expansion did not converge: {0}")]
    NotConverged(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LwError>;
