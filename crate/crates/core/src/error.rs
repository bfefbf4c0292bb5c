use thiserror::Error;

use crate::specfun::ScaledComplex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested value diverges at the given argument.
    #[error("singularity: {0}")]
    Singularity(String),

    /// The value exists but does not fit in a double; the scaled value is attached.
    #[error("range error: value with log-modulus {} overflows a double", .value.ln_abs())]
    Range { value: ScaledComplex },

    /// An iterative method (quadrature, root finding) missed its target.
    #[error("numerical failure in {what}: achieved tolerance {achieved:e}")]
    Numerical { what: String, achieved: f64 },

    /// A caller-asserted property of the input (e.g. convexity) was found to be false.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Two routes to the same quantity disagree beyond tolerance.
    #[error("internal consistency check failed in {what}: residual {residual:e}")]
    Consistency { what: String, residual: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(what: impl Into<String>, achieved: f64) -> Self {
        Error::Numerical {
            what: what.into(),
            achieved,
        }
    }
}
