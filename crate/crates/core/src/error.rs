use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid label {label}: graph has {n} qubits")]
    InvalidLabel { label: u32, n: u32 },

    #[error("invalid probability {0}: must lie in [0, 1]")]
    InvalidProbability(f64),

    #[error("wrong kind: {0}")]
    WrongKind(String),

    #[error("too large: {0}")]
    TooLarge(String),

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
