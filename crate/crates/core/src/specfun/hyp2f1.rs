//! Gauss hypergeometric function for real parameters and `z <= 0`.
//!
//! * `-1/2 <= z <= 0`: direct power series.
//! * `-2 <= z < -1/2`: Pfaff transformation
//!   `2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1))`, which maps the
//!   argument into `[1/3, 2/3]`.
//! * `z < -2`: the `1/z` connection formula, unless `a - b` is (close to) an
//!   integer, in which case the Pfaff series is summed up to the term cap.

use super::gamma::ln_gamma_signed;
use crate::error::{Error, Result};
use crate::Scalar;

/// Term cap for every series evaluation.
pub const MAX_TERMS: usize = 10_000;

/// Plain power series `sum (a)_n (b)_n / (c)_n z^n / n!`, valid for `|z| < 1`.
pub fn gauss2f1_direct<T: Scalar>(a: T, b: T, c: T, z: T) -> Result<T> {
    let mut term = T::one();
    let mut sum = T::one();
    let eps = T::epsilon();
    let mut small_run = 0;
    for n in 0..MAX_TERMS {
        let nf = T::from_count(n);
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + T::one())) * z;
        sum += term;
        if term == T::zero() {
            return Ok(sum);
        }
        if term.abs() <= eps * sum.abs() {
            small_run += 1;
            if small_run >= 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence {
        what: "2F1 power series",
        partial: sum.as_f64(),
        terms: MAX_TERMS,
    })
}

/// Pfaff-transformed series, valid for `z < 1/2`.
pub fn gauss2f1_pfaff<T: Scalar>(a: T, b: T, c: T, z: T) -> Result<T> {
    let w = z / (z - T::one());
    let s = gauss2f1_direct(a, c - b, c, w)?;
    Ok((T::one() - z).powf(-a) * s)
}

// Γ(c)Γ(p) / (Γ(q)Γ(r)) with signs; zero when q or r sits on a pole.
fn gamma_ratio<T: Scalar>(c: T, p: T, q: T, r: T) -> Result<T> {
    let on_pole = |x: T| x <= T::zero() && x == x.round();
    if on_pole(q) || on_pole(r) {
        return Ok(T::zero());
    }
    let (lc, sc) = ln_gamma_signed(c)?;
    let (lp, sp) = ln_gamma_signed(p)?;
    let (lq, sq) = ln_gamma_signed(q)?;
    let (lr, sr) = ln_gamma_signed(r)?;
    Ok(sc * sp * sq * sr * (lc + lp - lq - lr).exp())
}

fn gauss2f1_reciprocal<T: Scalar>(a: T, b: T, c: T, z: T) -> Result<T> {
    let inv = z.recip();
    let mz = -z;
    let t1 = gamma_ratio(c, b - a, b, c - a)?;
    let t2 = gamma_ratio(c, a - b, a, c - b)?;
    let mut value = T::zero();
    if t1 != T::zero() {
        value += t1 * mz.powf(-a) * gauss2f1_direct(a, a - c + T::one(), a - b + T::one(), inv)?;
    }
    if t2 != T::zero() {
        value += t2 * mz.powf(-b) * gauss2f1_direct(b, b - c + T::one(), b - a + T::one(), inv)?;
    }
    Ok(value)
}

/// `2F1(a, b; c; z)` for real parameters and `z <= 0`.
pub fn gauss2f1<T: Scalar>(a: T, b: T, c: T, z: T) -> Result<T> {
    if !(z <= T::zero()) {
        return Err(Error::Domain(format!("gauss2f1 requires z <= 0, got {z}")));
    }
    if c <= T::zero() && c == c.round() {
        return Err(Error::Domain(format!(
            "gauss2f1 requires c off the non-positive integers, got {c}"
        )));
    }
    if z == T::zero() {
        return Ok(T::one());
    }
    if z >= T::lit(-0.5) {
        return gauss2f1_direct(a, b, c, z);
    }
    if z >= T::lit(-2.0) {
        return gauss2f1_pfaff(a, b, c, z);
    }
    let d = a - b;
    if (d - d.round()).abs() > T::lit(1e-3) {
        gauss2f1_reciprocal(a, b, c, z)
    } else {
        gauss2f1_pfaff(a, b, c, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_argument() {
        assert_eq!(gauss2f1(1.0, 0.5, 1.5, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn arctan_identity() {
        // 2F1(1, 1/2; 3/2; -x^2) = arctan(x)/x
        for &x in &[0.3f64, 1.0, 2.0, 5.0, 40.0, 1e3] {
            let v = gauss2f1(1.0, 0.5, 1.5, -x * x).unwrap();
            let exact = x.atan() / x;
            assert!((v - exact).abs() <= 1e-12 * exact, "x={x}: {v} vs {exact}");
        }
        assert!(
            (gauss2f1(1.0, 0.5, 1.5, -1.0).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-13
        );
        assert!((gauss2f1(1.0, 0.5, 1.5, -4.0).unwrap() - 2f64.atan() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn log_identity() {
        // 2F1(1,1;2;-x) = ln(1+x)/x
        for &x in &[0.1f64, 0.9, 3.0, 50.0] {
            let v = gauss2f1(1.0, 1.0, 2.0, -x).unwrap();
            let exact = x.ln_1p() / x;
            assert!((v - exact).abs() <= 1e-12 * exact, "x={x}");
        }
    }

    #[test]
    fn terminating_series() {
        // 2F1(-2, b; c; z) = 1 - 2bz/c + b(b+1)z^2/(c(c+1))
        let (b, c, z) = (0.7f64, 1.9f64, -3.5f64);
        let exact = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        assert!((gauss2f1(-2.0, b, c, z).unwrap() - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn integral_representation_large_argument() {
        // 2F1(k, k-δ; k-δ+1; -c) = (k-δ) ∫_0^1 t^{k-δ-1} (1+ct)^{-k} dt
        use crate::specfun::quad_adaptive;
        for &(k, d, c) in &[
            (1.0f64, 0.5f64, 37.0f64),
            (2.0, 0.5, 12.0),
            (3.0, 0.8, 250.0),
            (1.0, 2.0 / 3.0, 1e4),
        ] {
            let s = k - d;
            let q = quad_adaptive(
                |t: f64| t.powf(s - 1.0) * (1.0 + c * t).powf(-k),
                0.0,
                1.0,
                1e-13,
            )
            .unwrap()
            .value
                * s;
            let v = gauss2f1(k, k - d, k - d + 1.0, -c).unwrap();
            assert!((v - q).abs() <= 1e-9 * q, "k={k} d={d} c={c}: {v} vs {q}");
        }
    }

    #[test]
    fn rejects_positive_argument() {
        assert!(gauss2f1(1.0, 1.0, 2.0, 0.1).is_err());
        assert!(gauss2f1(1.0, 1.0, -2.0, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn parameter_symmetry(a in 0.1f64..5.0, b in 0.1f64..5.0, c in 0.2f64..6.0, z in -50.0f64..0.0) {
            let lhs = gauss2f1(a, b, c, z).unwrap();
            let rhs = gauss2f1(b, a, c, z).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-300));
        }

        #[test]
        fn pfaff_matches_direct(a in 0.1f64..2.0, b in 0.1f64..2.0, c in 0.5f64..4.0, z in -0.95f64..0.0) {
            let d = gauss2f1_direct(a, b, c, z).unwrap();
            let p = gauss2f1_pfaff(a, b, c, z).unwrap();
            prop_assert!((d - p).abs() <= 1e-10 * d.abs());
        }
    }
}
