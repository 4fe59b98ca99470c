use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are individually valid but inconsistent with each other
    /// (mismatched grids, masses that do not belong together, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}` (line {line}): {message}")]
    Validation {
        key: String,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("step controller aborted at t = {time}: {message}")]
    StepAbort { time: f64, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StepAbort { .. } | Error::LinearSolve(_) => 2,
            Error::RootFinding(_) => 3,
            _ => 1,
        }
    }
}
