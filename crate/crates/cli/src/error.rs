use std::path::PathBuf;

use thiserror::Error;

use crate::config::KEYS;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(serde_json::Error),
    #[error("config must be a JSON object")]
    NotAnObject,
    #[error("unknown config keys: {} (accepted: {})", .0.join(", "), KEYS.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("config key `{path}`: {message}")]
    Type { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(compaction_core::Error),
    #[error("sweep axis `{0}` must look like key=v1,v2,...")]
    Axis(String),
    #[error("sweep task must be simulate, wave, speed or verify, not `{0}`")]
    Task(String),
    #[error("sweep needs at least one key=v1,v2,... axis")]
    NoAxes,
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("solver failed: {0}")]
    Solver(#[from] compaction_core::Error),
    #[error("sweep point {index}: {source}")]
    Point { index: usize, source: Box<CliError> },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Solver(_) => 2,
            CliError::Point { source, .. } => source.exit_code(),
        }
    }
}
