//! Error type shared across the crate.
//!
//! The variants map onto the CLI exit-code contract: input errors exit 2,
//! capacity errors exit 3, solver failures exit 4.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: bad dimensions, out-of-range values, malformed files.
    #[error("input error: {0}")]
    Input(String),

    /// A configured size cap would be exceeded (type counts, grid sizes, ...).
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A numerical routine failed to converge or hit a singular system.
    #[error("solver failure: {0}")]
    Solver(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }

    /// Stable process exit code for this error kind.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Json(_) => 2,
            Error::Capacity(_) => 3,
            Error::Solver(_) => 4,
            Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
