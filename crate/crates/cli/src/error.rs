use std::process::ExitCode;

use thiserror::Error;

/// Command errors, each mapped to a process exit code: failed checks exit 1,
/// everything that prevents a check from running exits 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid netlist: {0}")]
    Validation(String),

    #[error("pin mismatch: {0}")]
    PinMismatch(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("unknown property `{0}`")]
    UnknownProperty(String),

    #[error("{0}")]
    Usage(String),

    #[error("budget exhausted: {0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(2)
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> CliError {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl From<moorekit::Error> for CliError {
    fn from(err: moorekit::Error) -> CliError {
        match err {
            moorekit::Error::PinMismatch { .. } => CliError::PinMismatch(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
