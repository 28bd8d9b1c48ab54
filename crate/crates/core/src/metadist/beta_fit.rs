//! Moment-matched beta approximation of the meta distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::reg_inc_beta;
use crate::Scalar;

/// Beta law matched to `(M₁, M₂)`, or a point mass when the variance is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BetaShape<T> {
    Beta {
        a: T,
        b: T,
    },
    /// Zero variance: the CSP is the constant `at`.
    Degenerate {
        at: T,
    },
}

impl<T: Scalar> BetaShape<T> {
    /// Matches the first two moments.
    pub fn fit(m1: T, m2: T) -> Result<Self> {
        if !(m1 > T::zero() && m1 < T::one()) {
            return Err(Error::Domain(format!(
                "beta fit requires 0 < M1 < 1, got {m1}"
            )));
        }
        if !(m2 < m1) {
            return Err(Error::Domain(format!(
                "beta fit requires M2 < M1, got M2={m2}, M1={m1}"
            )));
        }
        let var = m2 - m1 * m1;
        if var <= T::tol(1e-15) * m1 {
            return Ok(BetaShape::Degenerate { at: m1 });
        }
        let b = (m1 - m2) * (T::one() - m1) / var;
        let a = m1 * b / (T::one() - m1);
        Ok(BetaShape::Beta { a, b })
    }

    /// `F̄(x) = P(P_s > x)`.
    pub fn ccdf(&self, x: T) -> Result<T> {
        let x = x.max(T::zero()).min(T::one());
        match *self {
            BetaShape::Beta { a, b } => Ok(T::one() - reg_inc_beta(x, a, b)?),
            BetaShape::Degenerate { at } => Ok(if x < at { T::one() } else { T::zero() }),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, BetaShape::Degenerate { .. })
    }

    /// Raw moments `(E[P], E[P²])` of the fitted law.
    pub fn moments(&self) -> (T, T) {
        match *self {
            BetaShape::Beta { a, b } => {
                let m1 = a / (a + b);
                (m1, m1 * (a + T::one()) / (a + b + T::one()))
            }
            BetaShape::Degenerate { at } => (at, at * at),
        }
    }
}

/// `F̄(x)` of the beta law matched to `(M₁, M₂)`.
pub fn beta_approx_meta<T: Scalar>(m1: T, m2: T, x: T) -> Result<T> {
    BetaShape::fit(m1, m2)?.ccdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_case() {
        let s = BetaShape::fit(0.5f64, 0.3).unwrap();
        match s {
            BetaShape::Beta { a, b } => {
                assert!((a - 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
            }
            _ => panic!("expected a proper beta law"),
        }
        assert!((s.ccdf(0.5).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(s.ccdf(0.0).unwrap(), 1.0);
        assert_eq!(s.ccdf(1.0).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_and_invalid() {
        let s = BetaShape::fit(0.6, 0.36).unwrap();
        assert!(s.is_degenerate());
        assert_eq!(s.ccdf(0.59).unwrap(), 1.0);
        assert_eq!(s.ccdf(0.61).unwrap(), 0.0);
        assert!(BetaShape::fit(0.6, 0.6).is_err());
        assert!(BetaShape::fit(1.0, 0.9).is_err());
    }

    proptest! {
        #[test]
        fn moment_round_trip(m1 in 0.02f64..0.98, frac in 0.01f64..0.99) {
            let m2 = m1 * m1 + frac * (m1 - m1 * m1);
            let s = BetaShape::fit(m1, m2).unwrap();
            let (r1, r2) = s.moments();
            prop_assert!((r1 - m1).abs() < 1e-10 && (r2 - m2).abs() < 1e-10);
        }
    }
}
