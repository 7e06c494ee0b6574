use thiserror::Error;

/// Errors shared by all analytic modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitsError {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A spec struct violates its invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    /// The combination of options is valid input but deliberately not handled.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A computation graph failed validation.
    #[error("graph error: {0}")]
    Graph(String),
    /// An empirical result contradicted a proven bound; the message carries
    /// the seed needed to replay the offending run.
    #[error("bound violation: {0}")]
    Violation(String),
}

pub type Result<T> = std::result::Result<T, LimitsError>;
