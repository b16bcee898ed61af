use std::fmt;
use std::io;

/// Failure reported as a single `error kind=<kind> msg="<text>"` line.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub msg: String,
}

impl CliError {
    pub fn new(kind: &'static str, msg: impl Into<String>) -> Self {
        Self { kind, msg: msg.into() }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::new("invalid-parameter", msg)
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::new("config-error", msg)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error kind={} msg={:?}", self.kind, self.msg)
    }
}

impl std::error::Error for CliError {}

impl From<qmc_ltft::Error> for CliError {
    fn from(e: qmc_ltft::Error) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::new("io-error", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::new("io-error", e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
