use std::fmt;

use dstar_core::Error as CoreError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration could not be read or is invalid.
    #[error("config error{}: {message}", key_suffix(.key))]
    Config { key: Option<String>, message: String },
    #[error("{0}")]
    Runtime(String),
}

fn key_suffix(key: &Option<String>) -> String {
    key.as_ref().map(|k| format!(" in `{k}`")).unwrap_or_default()
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError::Config {
            key: Some(key.into()),
            message: message.to_string(),
        }
    }

    pub fn runtime(message: impl fmt::Display) -> Self {
        CliError::Runtime(message.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config { key, message } => CliError::Config {
                key: Some(key),
                message,
            },
            e @ CoreError::BreakdownPoint { .. } => CliError::Config {
                key: Some("f".into()),
                message: e.to_string(),
            },
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
