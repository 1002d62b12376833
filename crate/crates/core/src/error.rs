use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jet order {0} is outside the supported range 1..=3")]
    InvalidOrder(usize),
    #[error("multi-index of total order {got} exceeds jet order {order}")]
    OrderExceeded { got: usize, order: usize },
    #[error("operation needs jet order {needed}, have {have}")]
    InsufficientOrder { needed: usize, have: usize },
    #[error("division by a jet with zero value part")]
    DivisionByZero,
    #[error("sqrt of non-positive value {0}")]
    SqrtDomain(f64),
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("non-integer power of non-positive value {0}")]
    PowDomain(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate chart: {0}")]
    DegenerateChart(String),
    #[error("metric is not positive definite (min eigenvalue {0:e})")]
    SingularMetric(f64),
    #[error("degenerate frame: found {found} of {needed} independent directions")]
    DegenerateFrame { found: usize, needed: usize },
    #[error("degenerate plane: |X|^2|Y|^2 - g(X,Y)^2 = {0:e}")]
    DegeneratePlane(f64),
    #[error("sampling domain is empty after shrinking by the margin")]
    EmptyDomain,
    #[error("exterior derivative of {0}-forms is not supported")]
    UnsupportedDegree(usize),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("reeb field is not unit: max |g(xi,xi) - 1| = {0:e}")]
    NotUnit(f64),
    #[error("reeb field is not killing: max |L_xi g| = {0:e}")]
    NotKilling(f64),
    #[error("xi-sectional curvature not positive: min = {0:e}")]
    DegenerateQ(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),
    #[error("expression parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot write `{path}`: {reason}")]
    Output { path: String, reason: String },
}

impl Error {
    /// Errors raised because the requested structure does not exist: the Reeb
    /// field fails a hypothesis of the Killing construction.
    pub fn is_degenerate_structure(&self) -> bool {
        matches!(self, Error::NotUnit(_) | Error::NotKilling(_) | Error::DegenerateQ(_))
    }
}
