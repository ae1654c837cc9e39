//! Experiment orchestration: configuration, runs, analysis artifacts, and
//! the command-line interface.

pub mod cli;
pub mod config;
pub mod csv;
pub mod reports;
pub mod runner;

use thiserror::Error;

/// Harness-level failure, carrying the process exit code: configuration and
/// numeric errors exit 2, I/O failures exit 3.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type HResult<T> = std::result::Result<T, HarnessError>;
