use thiserror::Error;

use crate::model::Params;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Rejection sampling never produced a connected topology.
    #[error("no connected topology after {attempts} placement attempts ({params})")]
    Generation { attempts: u32, params: Params },

    /// A text file did not match its documented format.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A schedule produced during a sweep failed verification.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: msg.into(),
    }
}
