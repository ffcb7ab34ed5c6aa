use thiserror::Error;

/// Error type shared by the whole library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The request is well formed but exceeds the sizes this library is
    /// designed to handle exactly (exhaustive enumeration, trellis storage).
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Pieces of a pipeline do not fit together (code vs. structure vs. spec).
    #[error("configuration error: {0}")]
    Configuration(String),
    /// Construction of an object failed (no modulus found, rank deficiency).
    #[error("construction failed: {0}")]
    Construction(String),
    /// An internal cross-check failed; indicates a bug, not bad input.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    /// File or serialization problem, with the offending path when known.
    #[error("io error{}: {source}", path.as_ref().map(|p| format!(" ({p})")).unwrap_or_default())]
    Io {
        path: Option<String>,
        #[source]
        source: std::io::Error,
    },
    /// JSON parse or encode problem, with the offending path when known.
    #[error("parse error{}: {source}", path.as_ref().map(|p| format!(" ({p})")).unwrap_or_default())]
    Parse {
        path: Option<String>,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    pub fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }
}
