use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("not a rational number: {0:?}")]
    BadRational(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("nonpositive price for good {0}")]
    NonpositivePrice(usize),
    #[error("flow is not maximum")]
    FlowNotMaximum,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("oracle found no admissible support")]
    NoSupport,
    #[error("oracle supports disagree on prices")]
    OracleDisagreement,
    #[error("objective undefined: buyer {0} has zero utility plus refund")]
    DegenerateObjective(usize),
    /// Signals a bug in the solver rather than bad input.
    #[error("internal contract violation: {0}")]
    Contract(String),
}
