use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Problem size below the smallest meaningful instance.
    #[error("problem size n = {n} is invalid: n must be at least 2")]
    InvalidSize { n: usize },

    /// An argument falls outside the domain of the operation.
    #[error("{what} = {value} is outside the valid range {range}")]
    Domain {
        what: &'static str,
        value: String,
        range: String,
    },

    /// The exact-rational backend was asked for a size beyond its cap.
    #[error("exact rational backend is capped at n = {cap}, got n = {n}")]
    Capacity { n: usize, cap: usize },

    /// A numerical procedure failed to produce a trustworthy value.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Two inputs that must describe the same instance do not.
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(
        what: &'static str,
        value: impl ToString,
        range: impl ToString,
    ) -> Self {
        Error::Domain {
            what,
            value: value.to_string(),
            range: range.to_string(),
        }
    }
}
