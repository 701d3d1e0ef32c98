//! Error types shared across the crate.

use thiserror::Error;

/// Scenario or agent configuration rejected during validation.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("missing value for `{field}`: {message}")]
    MissingField { field: String, message: String },

    #[error("failed to read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse config file {path}: {message}")]
    Parse { path: String, message: String },
}

impl ConfigError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::InvalidField {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn missing(field: &str, message: impl Into<String>) -> Self {
        ConfigError::MissingField {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// Data-file import/export and series validation failures.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error at line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("series is empty")]
    Empty,
}

/// Scoring rejected its inputs.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {predictions} predictions vs {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },

    #[error("experiment grid has no cells")]
    EmptyGrid,
}
