use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::QuadResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Arguments outside the region where the requested quantity exists.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge: best estimate {} ± {:.3e} after {} evaluations",
        .0.value, .0.abs_error_estimate, .0.evaluations
    )]
    NoConvergence(QuadResult),

    #[error("principal value does not exist: {0}")]
    NonCancellation(String),

    #[error("query {query} lies outside the grid hull [{lo}, {hi}]")]
    OutsideHull { query: f64, lo: f64, hi: f64 },

    #[error("non-positive value {value:e} at tau = {tau} inside the fit window")]
    NonPositive { tau: f64, value: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("discretization error estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    Discretization { estimate: f64, tol: f64 },

    #[error("insufficient data: {0}")]
    Insufficient(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by invalid arguments rather than numerical failure.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::OutsideHull { .. })
    }

    /// Best available estimate when the failure came from a quadrature routine.
    pub fn best_estimate(&self) -> Option<Complex64> {
        match self {
            Error::NoConvergence(r) => Some(r.value),
            _ => None,
        }
    }
}
