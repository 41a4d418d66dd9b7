use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes shared by every solver.
///
/// The CLI maps these onto process exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing required config key `{0}`")]
    MissingKey(String),

    #[error("config key `{key}`: cannot parse `{value}` ({reason})")]
    BadValue { key: String, value: String, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular matrix at k = {k:?}: {what}")]
    Singular { k: [f64; 3], what: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    /// 1 = configuration, 2 = numerical, 3 = I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::MissingKey(_) | Error::BadValue { .. } | Error::GridMismatch(_) => 1,
            Error::Singular { .. } | Error::Numerical(_) => 2,
            Error::Format(_) | Error::Io(_) => 3,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
