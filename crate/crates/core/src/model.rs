//! Domain types shared by the analytical modules, the simulator and the
//! solvers.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Scalar;

/// Link direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

/// Approximation used for the inter-cell interferer process in the uplink.
///
/// `Model1` places each interfering cluster of `N` users at one point
/// (collocated clusters); `Model2` treats the interferers as an
/// inhomogeneous Poisson process. Both share the same intensity measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterfererModel {
    #[serde(alias = "model1", alias = "1")]
    Model1,
    #[serde(alias = "model2", alias = "2")]
    Model2,
}

/// Network parameters. All quantities are linear-scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct NetworkParams<T> {
    /// BS density per unit area.
    pub lambda_b: T,
    /// Path-loss exponent, `> 2`.
    pub alpha: T,
    /// Users per NOMA cluster.
    #[serde(rename = "N")]
    pub n_users: usize,
    /// Nominal transmit power; cancels in every SIR ratio.
    #[serde(default = "unit")]
    pub tx_power: T,
}

fn unit<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> NetworkParams<T> {
    pub fn new(lambda_b: T, alpha: T, n_users: usize) -> Result<Self> {
        let p = Self {
            lambda_b,
            alpha,
            n_users,
            tx_power: T::one(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_b > T::zero() && self.lambda_b.is_finite()) {
            return Err(domain(format!(
                "BS density must be positive, got {}",
                self.lambda_b
            )));
        }
        if !(self.alpha > T::lit(2.0) && self.alpha.is_finite()) {
            return Err(domain(format!(
                "path-loss exponent must exceed 2, got {}",
                self.alpha
            )));
        }
        if self.n_users == 0 {
            return Err(domain("cluster size must be at least 1"));
        }
        Ok(())
    }

    /// `δ = 2/α`.
    #[inline]
    pub fn delta(&self) -> T {
        T::lit(2.0) / self.alpha
    }

    pub fn with_lambda(mut self, lambda_b: T) -> Self {
        self.lambda_b = lambda_b;
        self
    }

    pub fn with_users(mut self, n_users: usize) -> Self {
        self.n_users = n_users;
        self
    }

    pub(crate) fn check_rank(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.n_users {
            return Err(domain(format!("rank {m} outside 1..={}", self.n_users)));
        }
        Ok(())
    }
}

/// Downlink NOMA power fractions `β₁ ≤ … ≤ β_N`, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct PowerAllocation<T> {
    betas: Vec<T>,
}

impl<T: Scalar> PowerAllocation<T> {
    pub fn new(betas: Vec<T>) -> Result<Self> {
        if betas.is_empty() {
            return Err(domain("power allocation needs at least one fraction"));
        }
        if betas.iter().any(|b| !(*b >= T::zero()) || !b.is_finite()) {
            return Err(domain("power fractions must be finite and non-negative"));
        }
        if betas.windows(2).any(|w| w[0] > w[1]) {
            return Err(domain("power fractions must be nondecreasing in rank"));
        }
        let sum: T = betas.iter().copied().sum();
        if (sum - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(16.0)) {
            return Err(domain(format!("power fractions sum to {sum}, not 1")));
        }
        Ok(Self { betas })
    }

    /// Single-user allocation (`β₁ = 1`).
    pub fn oma() -> Self {
        Self {
            betas: vec![T::one()],
        }
    }

    pub fn betas(&self) -> &[T] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for PowerAllocation<T> {
    type Error = crate::Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T> From<PowerAllocation<T>> for Vec<T> {
    fn from(p: PowerAllocation<T>) -> Self {
        p.betas
    }
}

/// Moment order `b`: real, or purely imaginary (`b = jt`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentOrder<T> {
    Real(T),
    Imaginary(T),
}

impl<T: Scalar> MomentOrder<T> {
    pub fn as_complex(self) -> Complex<T> {
        match self {
            MomentOrder::Real(b) => Complex::new(b, T::zero()),
            MomentOrder::Imaginary(t) => Complex::new(T::zero(), t),
        }
    }

    pub fn re(self) -> T {
        self.as_complex().re
    }

    pub fn im(self) -> T {
        self.as_complex().im
    }

    /// `Some(k)` when the order is a positive integer.
    pub fn positive_integer(self) -> Option<usize> {
        match self {
            MomentOrder::Real(b) if b >= T::one() && b == b.round() && b < T::lit(1e6) => {
                b.to_usize()
            }
            _ => None,
        }
    }
}

impl<T: Scalar> From<T> for MomentOrder<T> {
    fn from(b: T) -> Self {
        MomentOrder::Real(b)
    }
}

/// How a moment value came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Classification {
    Finite,
    /// The rank's SIR target is unreachable and `Re(b) > 0`: the moment is 0.
    ZeroByThreshold,
    /// The rank's SIR target is unreachable and `Re(b) < 0`: the moment is ∞.
    InfiniteByThreshold,
    /// A negative moment whose defining integral diverges.
    InfiniteByDelay,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Finite => "finite",
            Classification::ZeroByThreshold => "zeroByThreshold",
            Classification::InfiniteByThreshold => "infiniteByThreshold",
            Classification::InfiniteByDelay => "infiniteByDelay",
        }
    }
}

/// A moment `M_b` together with its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue<T> {
    pub value: Complex<T>,
    pub classification: Classification,
}

impl<T: Scalar> MomentValue<T> {
    pub fn finite(value: Complex<T>) -> Self {
        Self {
            value,
            classification: Classification::Finite,
        }
    }

    pub fn real(value: T) -> Self {
        Self::finite(Complex::new(value, T::zero()))
    }

    pub fn zero_by_threshold() -> Self {
        Self {
            value: Complex::new(T::zero(), T::zero()),
            classification: Classification::ZeroByThreshold,
        }
    }

    pub fn infinite(classification: Classification) -> Self {
        Self {
            value: Complex::new(T::infinity(), T::zero()),
            classification,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(
            self.classification,
            Classification::InfiniteByThreshold | Classification::InfiniteByDelay
        )
    }

    /// Real part; `+∞` for the infinite classes.
    pub fn re(&self) -> T {
        self.value.re
    }
}
