use nalgebra::DVector;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error type shared by the whole crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition (wrong index variant,
    /// invalid table, malformed weights, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Arithmetic produced a non-finite value, or quadrature failed to
    /// converge within the halving budget.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A point lies outside the domain it was required to belong to.
    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// An iterative procedure hit its iteration cap. The last iterate is
    /// attached so callers can inspect or resume.
    #[error("{what}: iteration limit {limit} reached (last step {last_step:.3e})")]
    IterationLimit {
        what: &'static str,
        limit: usize,
        last_step: f64,
        last_iterate: DVector<f64>,
    },

    /// An internal invariant failed (e.g. an LP that is provably feasible
    /// came back infeasible).
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
