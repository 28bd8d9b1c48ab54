//! Meta distribution machinery: Gil-Pelaez inversion, beta approximation,
//! moment bounds, local-delay statistics and the NOMA/OMA gain.

mod beta_fit;
mod bounds;
mod delay;
mod gil_pelaez;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use beta_fit::{beta_approx_meta, BetaShape};
pub use bounds::{meta_bounds, MetaBounds};
pub use delay::{delay_reliability, delay_reliability_argument, delay_stats, DelayStats};
pub use gil_pelaez::{exact_meta, wynn_epsilon, ExactMetaPoint, GilPelaez};

use crate::downlink::moment_downlink;
use crate::error::Result;
use crate::fmt::sig10;
use crate::model::{
    Direction, InterfererModel, MomentOrder, MomentValue, NetworkParams, PowerAllocation,
};
use crate::uplink::{moment_uplink, UplinkMomentRequest};
use crate::Scalar;

/// Provenance of a meta-distribution curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MetaKind {
    Exact,
    BetaFit,
    Empirical,
}

impl MetaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetaKind::Exact => "exact",
            MetaKind::BetaFit => "betaFit",
            MetaKind::Empirical => "empirical",
        }
    }
}

/// `F̄(x)` sampled on a reliability grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaCurve<T> {
    pub xs: Vec<T>,
    pub values: Vec<T>,
    pub kind: MetaKind,
}

impl<T: Scalar> MetaCurve<T> {
    /// CSV with columns `x,value,kind`, numbers at 10 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value,kind\n");
        for (x, v) in self.xs.iter().zip(&self.values) {
            out.push_str(&format!(
                "{},{},{}\n",
                sig10(x.as_f64()),
                sig10(v.as_f64()),
                self.kind.as_str()
            ));
        }
        out
    }

    /// Largest pointwise gap to another curve on the same grid.
    pub fn sup_distance(&self, other: &MetaCurve<T>) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Which link a moment query refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkSpec<T> {
    Downlink(PowerAllocation<T>),
    Uplink(InterfererModel),
}

impl<T: Scalar> LinkSpec<T> {
    pub fn direction(&self) -> Direction {
        match self {
            LinkSpec::Downlink(_) => Direction::Downlink,
            LinkSpec::Uplink(_) => Direction::Uplink,
        }
    }

    /// `M_b` of the rank-`m` user at threshold `theta`.
    pub fn moment(
        &self,
        b: MomentOrder<T>,
        m: usize,
        params: &NetworkParams<T>,
        theta: T,
    ) -> Result<MomentValue<T>> {
        match self {
            LinkSpec::Downlink(betas) => moment_downlink(b, m, params, betas, theta),
            LinkSpec::Uplink(model) => moment_uplink(&UplinkMomentRequest {
                b,
                m,
                theta,
                params: *params,
                model: *model,
            }),
        }
    }

    /// The single-user (OMA) counterpart.
    pub fn oma(&self) -> Self {
        match self {
            LinkSpec::Downlink(_) => LinkSpec::Downlink(PowerAllocation::oma()),
            LinkSpec::Uplink(m) => LinkSpec::Uplink(*m),
        }
    }

    /// Characteristic-function style moments `t ↦ M_{jt}` for inversion.
    pub fn imaginary_moments<'a>(
        &'a self,
        m: usize,
        params: &'a NetworkParams<T>,
        theta: T,
    ) -> impl FnMut(T) -> Result<Complex<T>> + 'a {
        move |t| {
            Ok(self
                .moment(MomentOrder::Imaginary(t), m, params, theta)?
                .value)
        }
    }
}

/// `G(θ) = Σ_m M_{1,(m)}(θ) / M_1^{OMA}(θ)`.
pub fn gain<T: Scalar>(theta: T, params: &NetworkParams<T>, link: &LinkSpec<T>) -> Result<T> {
    let one = MomentOrder::Real(T::one());
    let mut sum = T::zero();
    for m in 1..=params.n_users {
        sum += link.moment(one, m, params, theta)?.re();
    }
    let oma = link
        .oma()
        .moment(one, 1, &params.with_users(1), theta)?
        .re();
    Ok(sum / oma)
}
