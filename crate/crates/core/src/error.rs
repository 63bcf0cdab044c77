use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("node subset is empty")]
    EmptySubset,
    #[error("node index {0} out of range for {1} nodes")]
    NodeOutOfRange(usize, usize),
    #[error("membership has length {found}, graph has {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("detector error: {0}")]
    Detector(String),
    #[error("inconsistent exploration state: {0}")]
    Inconsistent(String),
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("missing assignment for label {0:?}")]
    MissingLabel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
