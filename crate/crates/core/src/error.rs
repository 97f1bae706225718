use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Dimensions or sizes of the inputs do not fit together.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numerical routine failed (non-convergence, loss of definiteness).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Invalid sweep configuration. `line` is 1-based; 0 means the whole file.
    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
