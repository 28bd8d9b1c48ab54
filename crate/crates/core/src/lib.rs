//! Moments and meta distribution of the conditional success probability in
//! uplink and downlink NOMA cellular networks modelled by Poisson point
//! processes, a Monte Carlo simulator to check them, and the power-allocation
//! programs built on top.
//!
//! The analytical code is generic over [`Scalar`]; the aliases below fix it
//! to `f64`, which is what the simulator, optimizer and CLI use.

// `!(x > 0)` is used on purpose so that NaN inputs are rejected too;
// quadrature nodes are kept at the digits they were published with.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

mod error;
mod scalar;

pub mod downlink;
pub mod fmt;
pub mod geometry;
pub mod manifest;
pub mod metadist;
pub mod model;
pub mod optimizer;
pub mod simulator;
pub mod specfun;
pub mod uplink;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type C64 = num_complex::Complex<f64>;
pub type Params = model::NetworkParams<f64>;
pub type Betas = model::PowerAllocation<f64>;
pub type Order = model::MomentOrder<f64>;
pub type Moment = model::MomentValue<f64>;
pub type Curve = metadist::MetaCurve<f64>;
pub type Targets = optimizer::OptTargets<f64>;
pub type Allocation = optimizer::OptResult<f64>;

/// `10^{dB/10}`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10 log₁₀ x`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
