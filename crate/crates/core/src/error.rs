use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operation is undefined for the zero vector")]
    ZeroVector,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("state {state} is not valid for walk {walk}")]
    InvalidState { state: String, walk: String },

    #[error("invalid target {target}: {reason}")]
    InvalidTarget { target: String, reason: String },

    #[error("empirical distribution has no returned excursions")]
    EmptySample,

    #[error("only {got} conditioned excursions, need at least {need}")]
    InsufficientConditionedSample { got: u64, need: u64 },

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
