//! Local-delay statistics and the delay–reliability transform.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::Scalar;

/// Mean and variance of the local delay (number of attempts until the first
/// success), averaged over network realizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayStats<T> {
    pub mean: T,
    pub variance: T,
}

/// From `M₋₁` and `M₋₂`; infinite inputs propagate.
pub fn delay_stats<T: Scalar>(m_minus1: T, m_minus2: T) -> Result<DelayStats<T>> {
    if m_minus1.is_nan() || m_minus2.is_nan() {
        return Err(Error::Domain("delay moments must be numbers".into()));
    }
    if m_minus1.is_finite() && m_minus1 < T::one() - T::tol(1e-12) {
        return Err(Error::Domain(format!(
            "M_-1 must be at least 1, got {m_minus1}"
        )));
    }
    if m_minus1.is_infinite() || m_minus2.is_infinite() {
        return Ok(DelayStats {
            mean: m_minus1,
            variance: T::infinity(),
        });
    }
    Ok(DelayStats {
        mean: m_minus1,
        variance: T::lit(2.0) * m_minus2 - m_minus1 - m_minus1 * m_minus1,
    })
}

/// The CSP a user needs so that `k` attempts succeed with probability `x`:
/// `1 − (1 − x)^{1/k}`.
pub fn delay_reliability_argument<T: Scalar>(k: u32, x: T) -> Result<T> {
    if k == 0 {
        return Err(Error::Domain(
            "number of attempts must be at least 1".into(),
        ));
    }
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::Domain(format!(
            "reliability must lie in [0,1], got {x}"
        )));
    }
    Ok(-((T::one() - x).ln() / T::from_count(k as usize)).exp_m1())
}

/// Fraction of users that succeed within `k` attempts with probability at
/// least `x`, given the meta distribution `ccdf`.
pub fn delay_reliability<T, F>(mut ccdf: F, k: u32, x: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    ccdf(delay_reliability_argument(k, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_law() {
        let p = 0.4f64;
        // E[L] = 1/p, E[L²] = (2−p)/p², so M_-2 = 1/p²
        let s = delay_stats(1.0 / p, 1.0 / (p * p)).unwrap();
        assert!((s.mean - 2.5).abs() < 1e-14);
        assert!((s.variance - (1.0 - p) / (p * p)).abs() < 1e-12);
        assert_eq!(delay_stats(2.0, 6.0).unwrap().variance, 6.0);
        assert!(delay_stats(f64::INFINITY, f64::INFINITY)
            .unwrap()
            .mean
            .is_infinite());
    }

    #[test]
    fn transform_arguments() {
        assert!((delay_reliability_argument(1, 0.3f64).unwrap() - 0.3).abs() < 1e-15);
        assert!((delay_reliability_argument(2, 0.95f64).unwrap() - 0.7764).abs() < 1e-4);
        assert!((delay_reliability_argument(3, 0.95f64).unwrap() - 0.6316).abs() < 1e-4);
        assert!(delay_reliability_argument(0, 0.5f64).is_err());
    }

    #[test]
    fn monotone_in_attempts() {
        let ccdf = |x: f64| Ok(1.0 - x * x);
        let mut prev = 0.0;
        for k in 1..6 {
            let v = delay_reliability(ccdf, k, 0.8).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
