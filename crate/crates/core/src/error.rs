use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Callers that need a process exit status use [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (dimension mismatch, bad pmf, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration key is missing or malformed.
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    /// Asymptotic quantities requested at a block length that is too short.
    #[error("asymptotic regime not reached: {0}")]
    RegimeNotReached(String),

    /// An exhaustive search or dense computation would exceed its size guard.
    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }

    /// 2 validation, 3 budget guard, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config { .. } | Error::RegimeNotReached(_) => 2,
            Error::Budget(_) => 3,
            Error::Io { .. } | Error::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
