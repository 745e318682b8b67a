use std::path::PathBuf;

use thiserror::Error;

/// Rejected configuration: bad values, unknown names, inconsistent inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("`{field}` out of range: {reason}")]
    OutOfRange { field: String, reason: String },
    #[error("unknown {what} `{name}`; available: {}", available.join(", "))]
    Unknown { what: &'static str, name: String, available: Vec<String> },
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn out_of_range(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::OutOfRange { field: field.into(), reason: reason.into() }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
