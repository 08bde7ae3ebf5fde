use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A value would leave the 128-bit integer range, or a table would exceed its size cap.
    #[error("range error: {0}")]
    Range(String),

    /// The splitter ran out of its retry budget on a composite.
    #[error("factorization exhausted on composite {value}{}", .k.map(|k| format!(" (series term k = {k})")).unwrap_or_default())]
    FactorizationExhausted { value: u128, k: Option<u32> },

    #[error("oracle cap exceeded: {what} = {size} > cap {cap}")]
    OracleCap { what: &'static str, size: u128, cap: u128 },

    #[error("cache error: {0}")]
    Cache(String),
}

impl Error {
    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Attaches the series index to a factorization failure.
    pub(crate) fn at_series_term(self, k: u32) -> Self {
        match self {
            Error::FactorizationExhausted { value, .. } => Error::FactorizationExhausted { value, k: Some(k) },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
