use std::path::Path;

use rydberg_ghz_core::Error as CoreError;

/// Failures of a command, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Parse { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    /// Validation error tied to a configuration field.
    pub fn field(path: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{path}: {msg}"))
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.display().to_string(),
            line,
            message: msg.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Geometry(_)
            | CoreError::Capacity { .. }
            | CoreError::Shape { .. }
            | CoreError::Domain { .. }
            | CoreError::InvalidParameter { .. } => CliError::Validation(e.to_string()),
            CoreError::Propagation { .. }
            | CoreError::Spectral(_)
            | CoreError::SingularSchedule { .. }
            | CoreError::Fit { .. }
            | CoreError::Inference { .. }
            | CoreError::Optimization { .. } => CliError::Numerical(e.to_string()),
        }
    }
}
