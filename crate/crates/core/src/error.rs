use std::fmt;

/// Failure kinds shared by every module. `kind()` is the stable tag used in
/// machine-readable error lines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidParameter(String),
    UnsupportedDimension(usize),
    BudgetExceeded(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::UnsupportedDimension(_) => "unsupported-dimension",
            Error::BudgetExceeded(_) => "budget-exceeded",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::UnsupportedDimension(d) => write!(f, "unsupported dimension {d}"),
            Error::BudgetExceeded(msg) => write!(f, "budget exceeded: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
