//! Crate-wide error type.
//!
//! Every fallible operation returns one of three error categories, which
//! map directly onto the CLI exit codes: usage (1), data (2), model (3).

use thiserror::Error;

/// Error raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad arguments, bad configuration, or a precondition violation.
    #[error("{0}")]
    Usage(String),
    /// Malformed or inconsistent input data.
    #[error("{0}")]
    Data(String),
    /// Model/schema mismatch or an invalid model artifact.
    #[error("{0}")]
    Model(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    /// CLI exit code for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Data(_) => 2,
            Error::Model(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Data(format!("i/o error: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
