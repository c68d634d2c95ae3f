use std::fmt;

/// Command-line failure categories, mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or flag combinations (exit 1).
    Usage(String),
    /// Input data could not be read or is invalid (exit 2).
    Data(String),
    /// Too many mixtures failed during a run (exit 3).
    PartialFailure(String),
}

impl CliError {
    pub const USAGE: i32 = 1;

    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::PartialFailure(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::PartialFailure(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<convmix_core::Error> for CliError {
    fn from(e: convmix_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
