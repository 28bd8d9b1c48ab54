use thiserror::Error;

/// Errors raised by the analytical kernels, the simulator and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("pole of the gamma function at {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("{what} did not converge after {terms} terms (partial value {partial})")]
    NoConvergence {
        what: &'static str,
        partial: f64,
        terms: usize,
    },

    #[error("quadrature tolerance not reached: estimate {estimate}, error bound {error_bound}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("missing moment of order {0}")]
    MissingMoment(String),

    #[error("target {target} is not achievable (supremum {supremum})")]
    Unachievable { target: f64, supremum: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
