use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or inconsistent arguments (mismatched base points, bad sizes).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Input outside the region where the operation is defined (cut locus, chart radius).
    #[error("domain error: {0}")]
    Domain(String),
    /// A boundary value problem without a unique solution (conjugate endpoints).
    #[error("singular problem: {0}")]
    Singular(String),
    /// A documented precondition of a solver was not met.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An iteration diverged; carries the last observed residual.
    #[error("iteration diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<S: Into<String>>(msg: S) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn domain<S: Into<String>>(msg: S) -> Error {
    Error::Domain(msg.into())
}
