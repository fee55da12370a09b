use thiserror::Error;

/// Errors raised by lattice construction, calculators and verifiers.
///
/// Theorem violations are never errors; they are report content.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inconsistent call, e.g. families from different lattices.
    #[error("usage error: {0}")]
    Usage(String),
    /// A configured size cap would be exceeded.
    #[error("resource limit exceeded: {what} ({actual} > cap {cap})")]
    Resource { what: String, actual: String, cap: String },
    /// Malformed or corrupted lattice cache file.
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn resource(
        what: impl Into<String>,
        actual: impl ToString,
        cap: impl ToString,
    ) -> Self {
        Error::Resource {
            what: what.into(),
            actual: actual.to_string(),
            cap: cap.to_string(),
        }
    }
}
