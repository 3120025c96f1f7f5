use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A well-formed request this crate deliberately does not support.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Arguments outside the evaluated envelope of a special function.
    #[error("unsupported range: {0}")]
    UnsupportedRange(String),

    #[error("eigensolver failed to converge after {iterations} iterations (off-diagonal residual {residual:e})")]
    NumericalFailure { iterations: usize, residual: f64 },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Wraps a failure that occurred while processing lattice size `n`.
    #[error("N={n}: {source}")]
    AtSize {
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn at_size(self, n: usize) -> Self {
        Error::AtSize {
            n,
            source: Box::new(self),
        }
    }

    /// True when the root cause is a convergence failure.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalFailure { .. } => true,
            Error::AtSize { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
