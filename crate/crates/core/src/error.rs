use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {msg}")]
    Input { path: PathBuf, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("model version mismatch: file has {found}, expected {expected}")]
    ModelVersion { found: String, expected: String },

    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Input {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input { .. }
            | Error::InvalidInput(_)
            | Error::Parameter(_)
            | Error::ModelVersion { .. }
            | Error::Generation(_)
            | Error::Io { .. } => 2,
            Error::Training(_) | Error::Fit(_) => 3,
            Error::Contract(_) => 4,
        }
    }
}
