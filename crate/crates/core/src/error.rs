use thiserror::Error;

pub type Result<T, E = UrtError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrtError {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A ball or code was requested beyond the radius at which the network is exact.
    #[error("truncation error: requested radius {requested} exceeds validity {validity}")]
    Truncation { requested: u64, validity: u64 },

    /// A sampler or caller broke a declared contract (degree bound, mass bound, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A measure is degenerate for the requested construction.
    #[error("degenerate measure: {0}")]
    Degenerate(String),

    #[error("invalid mark: {0}")]
    Mark(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("precision error: {0}")]
    Precision(String),

    /// A rejection sampler ran out of proposals.
    #[error("rejection budget exhausted: {0}")]
    Retry(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for UrtError {
    fn from(e: std::io::Error) -> Self {
        UrtError::Io(e.to_string())
    }
}
