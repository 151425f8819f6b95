use thiserror::Error;

/// Every failure the library can report.
///
/// The variants map onto the CLI exit-code contract: `Parse`/`Validation`
/// are configuration errors (exit 2), the rest are domain errors (exit 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QhetError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("mode index {index} out of range for a {n_modes}-mode state")]
    Index { index: usize, n_modes: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl QhetError {
    pub fn validation(key: &str, message: impl Into<String>) -> Self {
        QhetError::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn is_config_error(&self) -> bool {
        matches!(self, QhetError::Parse { .. } | QhetError::Validation { .. })
    }
}

impl From<std::io::Error> for QhetError {
    fn from(e: std::io::Error) -> Self {
        QhetError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for QhetError {
    fn from(e: serde_json::Error) -> Self {
        QhetError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QhetError>;
