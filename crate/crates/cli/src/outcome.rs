//! Failures and their exit codes.

use std::fmt;
use std::path::Path;

use crate::config::ConfigError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INSUFFICIENT: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Solver(String),
    Insufficient(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Insufficient(_) => EXIT_INSUFFICIENT,
            CliError::Solver(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Insufficient(m) => write!(f, "insufficient data: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<enhdiff::Error> for CliError {
    fn from(e: enhdiff::Error) -> Self {
        use enhdiff::Error as E;
        match e {
            E::Config(_) | E::Spec(_) | E::UnsupportedVariant(_) => CliError::Config(ConfigError {
                line: None,
                message: e.to_string(),
            }),
            E::InsufficientData { .. } => CliError::Insufficient(e.to_string()),
            E::Io(err) => CliError::Io(err.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(dir.join(name), bytes).map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_file(dir, name, text.as_bytes())
}
