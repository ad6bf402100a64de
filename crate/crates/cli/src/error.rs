use std::io;

use qpt_core::QptError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("{path}:{line}: expected `key = value`, got `{text}`")]
    Syntax {
        path: String,
        line: usize,
        text: String,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
    #[error(transparent)]
    Core(#[from] QptError),
}

impl CliError {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        CliError::InvalidValue {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// 3 for numerical failures, 2 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}
