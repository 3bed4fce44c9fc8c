use thiserror::Error;

/// Errors raised by the evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The argument could not be told apart from `p/q` at working precision.
    #[error("rational input: indistinguishable from {p}/{q}")]
    RationalInput { p: i64, q: i64 },

    #[error("degenerate periodic expansion: {0}")]
    Degenerate(String),

    #[error("extended precision arithmetic failed: {0}")]
    Precision(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
