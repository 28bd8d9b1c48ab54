//! Closed-form downlink moments of the conditional success probability,
//! negative moments and mean local delay.
//!
//! With `c_m = (β_m/θ − Σ_{i<m} β_i)^{-1}` and
//! `A_{b,m} = δ ∫₀¹ [1 − (1 + c_m t)^{−b}] t^{−1−δ} dt`, the rank-`m` moment is
//! `M_b = B(A + N − m + 1, m) / B(N − m + 1, m)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{Classification, MomentOrder, MomentValue, NetworkParams, PowerAllocation};
use crate::specfun::{
    beta_complex, beta_real, expm1_complex, gauss2f1, gen_binomial, Quadrature, GAUSS2F1_MAX_TERMS,
};
use crate::Scalar;

/// `c_m` for rank `m` (1-based).
///
/// Negative or infinite values mean the threshold regime
/// `θ ≥ β_m / Σ_{i<m} β_i`, where the rank's SIR target is unreachable.
pub fn c_coefficient<T: Scalar>(betas: &PowerAllocation<T>, theta: T, m: usize) -> Result<T> {
    if !(theta > T::zero()) {
        return Err(Error::Domain(format!(
            "threshold must be positive, got {theta}"
        )));
    }
    let b = betas.betas();
    if m == 0 || m > b.len() {
        return Err(Error::Domain(format!("rank {m} outside 1..={}", b.len())));
    }
    let below: T = b[..m - 1].iter().copied().sum();
    let denom = b[m - 1] / theta - below;
    Ok(if denom == T::zero() {
        T::infinity()
    } else {
        denom.recip()
    })
}

/// True when `c` signals the threshold regime.
#[inline]
pub fn in_threshold_regime<T: Scalar>(c: T) -> bool {
    c < T::zero() || c.is_infinite()
}

/// Which evaluation of `A` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum APath {
    /// Series for positive-integer orders, quadrature otherwise.
    Auto,
    /// Binomial series with hypergeometric coefficients.
    Series,
    /// Direct quadrature (authoritative for complex orders).
    Quadrature,
}

/// `A_{b,m}` for `c > 0`.
pub fn a_coefficient<T: Scalar>(b: MomentOrder<T>, c: T, delta: T) -> Result<Complex<T>> {
    a_coefficient_with(b, c, delta, APath::Auto)
}

/// `A_{b,m}` evaluated along an explicit path.
pub fn a_coefficient_with<T: Scalar>(
    b: MomentOrder<T>,
    c: T,
    delta: T,
    path: APath,
) -> Result<Complex<T>> {
    if !(c >= T::zero()) || c.is_infinite() {
        return Err(Error::Domain(format!(
            "A coefficient requires finite c >= 0, got {c}"
        )));
    }
    if c == T::zero() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    match path {
        APath::Quadrature => a_quadrature(b.as_complex(), c, delta),
        APath::Series => a_series(b.as_complex(), c, delta),
        APath::Auto => {
            if b.positive_integer().is_some() {
                // Terminating series; quadrature is the fallback.
                a_series(b.as_complex(), c, delta)
                    .or_else(|_| a_quadrature(b.as_complex(), c, delta))
            } else if b.re() == T::zero() && b.im().abs() >= T::lit(CONTOUR_MIN_ORDER) {
                a_contour(b.im(), c, delta)
            } else {
                a_quadrature(b.as_complex(), c, delta)
            }
        }
    }
}

// Below this |t| the straight quadrature is cheap enough.
const CONTOUR_MIN_ORDER: f64 = 16.0;

// Purely imaginary order `b = jt`, |t| large. With `u = ln(1 + c s^p)`,
// A = e^{−bU} − 1 + b c^δ ∫₀^U e^{−bu} (e^u − 1)^{−δ} du,  U = ln(1+c),
// and the u-path is pushed down into the lower half plane, where e^{−jtu}
// decays: two short vertical legs at u = 0 and u = U remain, the horizontal
// leg at depth Y contributes O(e^{−tY}).
fn a_contour<T: Scalar>(t: T, c: T, delta: T) -> Result<Complex<T>> {
    if t < T::zero() {
        return a_contour(-t, c, delta).map(|a| a.conj());
    }
    let j = Complex::new(T::zero(), T::one());
    let half = T::lit(0.5);
    let depth = T::lit(40.0);
    let y_max = (depth / t).min(T::lit(3.0));
    let quad = Quadrature::new(T::tol(1e-14), T::tol(1e-12));

    // Leg at 0: y = v^q removes the y^{−δ} endpoint singularity.
    let q = (T::one() - delta).recip();
    let v_max = y_max.powf(T::one() - delta);
    let leg0 = quad.integrate(
        |v: T| -> Complex<T> {
            let y = v.powf(q);
            // (e^{−jy} − 1)^{−δ} y^{δ} written without the branch point
            let ratio = if y > T::zero() {
                T::lit(2.0) * (y * half).sin() / y
            } else {
                T::one()
            };
            let phase = Complex::new(T::zero(), delta * (T::PI() + y) * half).exp();
            phase * ((-t * y).exp() * q * ratio.powf(-delta))
        },
        T::zero(),
        v_max,
    )?;
    let leg0 = -j * leg0.value;

    let big_u = c.ln_1p();
    let lift = T::one() + c;
    let leg_u = quad.integrate(
        |y: T| -> Complex<T> {
            let w = Complex::new(lift * y.cos() - T::one(), -lift * y.sin());
            w.powf(-delta) * (-t * y).exp()
        },
        T::zero(),
        y_max,
    )?;
    let edge = Complex::new(T::zero(), -t * big_u).exp();
    let leg_u = j * edge * leg_u.value;

    let b = j * t;
    Ok(edge - T::one() + b * c.powf(delta) * (leg0 + leg_u))
}

fn a_series<T: Scalar>(b: Complex<T>, c: T, delta: T) -> Result<Complex<T>> {
    let terminating = b.im == T::zero() && b.re >= T::zero() && b.re == b.re.round();
    let kmax = if terminating {
        b.re.to_usize().unwrap_or(0)
    } else {
        GAUSS2F1_MAX_TERMS
    };
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut ck = T::one();
    for k in 1..=kmax {
        let kf = T::from_count(k);
        ck *= c;
        let f = gauss2f1(kf, kf - delta, kf - delta + T::one(), -c)?;
        let sign = if k % 2 == 1 { T::one() } else { -T::one() };
        let term = gen_binomial(b, k) * (sign * ck * delta / (kf - delta) * f);
        sum += term;
        if !terminating && term.norm() <= T::lit(1e-14) * sum.norm() {
            return Ok(sum);
        }
        if !sum.re.is_finite() || !sum.im.is_finite() {
            break;
        }
    }
    if terminating {
        Ok(sum)
    } else {
        Err(Error::NoConvergence {
            what: "A-coefficient series",
            partial: sum.norm().as_f64(),
            terms: kmax,
        })
    }
}

/// `δ p ∫₀¹ [1 − (1 + c s^p)^{−b}] s^{−p} ds` with `p = 1/(1−δ)`; the
/// substitution `t = s^p` removes the endpoint singularity.
fn a_quadrature<T: Scalar>(b: Complex<T>, c: T, delta: T) -> Result<Complex<T>> {
    let p = (T::one() - delta).recip();
    let integrand = |s: T| -> Complex<T> {
        if s <= T::zero() {
            return b * c;
        }
        let sp = s.powf(p);
        let x = c * sp;
        // 1 − (1+x)^{−b} = −expm1(−b ln(1+x))
        let v = -expm1_complex(b * (-x.ln_1p()));
        v / sp
    };
    let quad = Quadrature::new(T::tol(1e-13), T::tol(1e-11)).with_max_subdivisions(20_000);
    let est = match quad.integrate(integrand, T::zero(), T::one()) {
        Ok(e) => e,
        Err(Error::Quadrature { .. }) => {
            // Highly oscillatory integrands for large imaginary orders: keep the
            // best estimate when its error is still tiny in absolute terms.
            let e = quad.integrate_best_effort(integrand, T::zero(), T::one());
            if e.error > T::tol(1e-8) {
                return Err(Error::Quadrature {
                    estimate: e.value.norm().as_f64(),
                    error_bound: e.error.as_f64(),
                });
            }
            e
        }
        Err(e) => return Err(e),
    };
    Ok(est.value * (delta * p))
}

/// `M_b` for the rank-`m` user.
pub fn moment_downlink<T: Scalar>(
    b: MomentOrder<T>,
    m: usize,
    params: &NetworkParams<T>,
    betas: &PowerAllocation<T>,
    theta: T,
) -> Result<MomentValue<T>> {
    check_inputs(m, params, betas)?;
    let bc = b.as_complex();
    if bc.im == T::zero() && bc.re < T::zero() {
        return neg_moment_downlink(-bc.re, m, params, betas, theta);
    }
    if bc == Complex::new(T::zero(), T::zero()) {
        return Ok(MomentValue::real(T::one()));
    }
    let c = c_coefficient(betas, theta, m)?;
    if in_threshold_regime(c) {
        return threshold_value(bc);
    }
    let a = a_coefficient(b, c, params.delta())?;
    Ok(MomentValue::finite(beta_ratio(a, m, params.n_users)?))
}

fn threshold_value<T: Scalar>(b: Complex<T>) -> Result<MomentValue<T>> {
    if b.re > T::zero() {
        Ok(MomentValue::zero_by_threshold())
    } else if b.re < T::zero() {
        Ok(MomentValue::infinite(Classification::InfiniteByThreshold))
    } else {
        Err(Error::Undefined(
            "moment with zero real order in the threshold regime".into(),
        ))
    }
}

// B(A + N − m + 1, m) / B(N − m + 1, m)
fn beta_ratio<T: Scalar>(a: Complex<T>, m: usize, n: usize) -> Result<Complex<T>> {
    let shift = T::from_count(n - m + 1);
    let mf = T::from_count(m);
    let num = beta_complex(a + shift, mf)?;
    Ok(num / beta_real(shift, mf)?)
}

fn check_inputs<T: Scalar>(
    m: usize,
    params: &NetworkParams<T>,
    betas: &PowerAllocation<T>,
) -> Result<()> {
    params.validate()?;
    params.check_rank(m)?;
    if betas.len() != params.n_users {
        return Err(Error::Domain(format!(
            "{} power fractions for a cluster of {}",
            betas.len(),
            params.n_users
        )));
    }
    Ok(())
}

/// `D_{w,m} = Σ_k C(w,k) c^k δ/(k−δ)`, the exponent driving negative moments.
///
/// The series is used for `c < 1` (or integer `w`, where it terminates); for
/// `c ≥ 1` and non-integer `w` it is continued analytically as `−A_{−w}`.
pub fn d_coefficient<T: Scalar>(w: T, c: T, delta: T) -> Result<T> {
    let integer = w == w.round() && w >= T::zero();
    if c < T::one() || integer {
        let kmax = if integer {
            w.to_usize().unwrap_or(0)
        } else {
            GAUSS2F1_MAX_TERMS
        };
        let wc = Complex::new(w, T::zero());
        let mut sum = T::zero();
        let mut ck = T::one();
        for k in 1..=kmax {
            let kf = T::from_count(k);
            ck *= c;
            let term = gen_binomial(wc, k).re * ck * delta / (kf - delta);
            sum += term;
            if !integer && term.abs() < T::lit(1e-14) * sum.abs() {
                return Ok(sum);
            }
        }
        if integer {
            return Ok(sum);
        }
    }
    Ok(-a_quadrature(Complex::new(-w, T::zero()), c, delta)?.re)
}

/// `M_{−w}` for `w > 0`.
pub fn neg_moment_downlink<T: Scalar>(
    w: T,
    m: usize,
    params: &NetworkParams<T>,
    betas: &PowerAllocation<T>,
    theta: T,
) -> Result<MomentValue<T>> {
    check_inputs(m, params, betas)?;
    if !(w > T::zero()) {
        return Err(Error::Domain(format!(
            "negative-moment order must be positive, got {w}"
        )));
    }
    let c = c_coefficient(betas, theta, m)?;
    if in_threshold_regime(c) {
        return Ok(MomentValue::infinite(Classification::InfiniteByThreshold));
    }
    let d = d_coefficient(w, c, params.delta())?;
    let shift = T::from_count(params.n_users - m + 1);
    if d >= shift {
        return Ok(MomentValue::infinite(Classification::InfiniteByDelay));
    }
    let mf = T::from_count(m);
    Ok(MomentValue::real(
        beta_real(shift - d, mf)? / beta_real(shift, mf)?,
    ))
}

/// Mean local delay `M_{−1}` of the rank-`m` user.
pub fn mean_local_delay_downlink<T: Scalar>(
    m: usize,
    params: &NetworkParams<T>,
    betas: &PowerAllocation<T>,
    theta: T,
) -> Result<MomentValue<T>> {
    neg_moment_downlink(T::one(), m, params, betas, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(x: f64) -> f64 {
        10f64.powf(x / 10.0)
    }

    fn alloc(b: &[f64]) -> PowerAllocation<f64> {
        PowerAllocation::new(b.to_vec()).unwrap()
    }

    #[test]
    fn c_examples() {
        let b = alloc(&[0.35, 0.65]);
        let t = db(-5.0);
        assert!((c_coefficient(&b, t, 1).unwrap() - 0.9035).abs() < 1e-4);
        assert!((c_coefficient(&b, t, 2).unwrap() - 0.5863).abs() < 1e-4);
        assert!((c_coefficient(&b, 0.7, 1).unwrap() - 0.7 / 0.35).abs() < 1e-14);
        let b = alloc(&[0.4, 0.6]);
        let c = c_coefficient(&b, 1.5, 2).unwrap();
        assert!(in_threshold_regime(c));
        assert!(in_threshold_regime(c_coefficient(&b, 2.0, 2).unwrap()));
    }

    #[test]
    fn a_first_order_arctan() {
        let a = a_coefficient(MomentOrder::Real(1.0), 1.0, 0.5).unwrap();
        assert!((a.re - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let q = a_coefficient_with(MomentOrder::Real(1.0), 1.0, 0.5, APath::Quadrature).unwrap();
        assert!((q.re - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
        let small = a_coefficient(MomentOrder::Imaginary(3.0), 1e-12, 0.5).unwrap();
        assert!(small.norm() < 1e-10);
    }

    #[test]
    fn imaginary_orders_contour_matches_quadrature() {
        for &delta in &[0.5f64, 2.0 / 3.0, 0.8] {
            for &c in &[0.05f64, 0.9, 2.95, 40.0] {
                for &t in &[16.0f64, -25.0, 120.0, 700.0] {
                    let b = MomentOrder::Imaginary(t);
                    let auto = a_coefficient(b, c, delta).unwrap();
                    let quad = a_coefficient_with(b, c, delta, APath::Quadrature).unwrap();
                    assert!(
                        (auto - quad).norm() <= 1e-8 * quad.norm().max(1.0),
                        "δ={delta} c={c} t={t}: {auto} vs {quad}"
                    );
                }
            }
        }
    }

    #[test]
    fn series_and_quadrature_agree() {
        for &delta in &[0.5, 2.0 / 3.0, 0.8] {
            for &c in &[0.1, 0.5, 0.9035, 2.0, 7.5] {
                for b in 1..=3 {
                    let o = MomentOrder::Real(b as f64);
                    let s = a_coefficient_with(o, c, delta, APath::Series).unwrap();
                    let q = a_coefficient_with(o, c, delta, APath::Quadrature).unwrap();
                    assert!((s - q).norm() < 1e-8, "δ={delta} c={c} b={b}: {s} vs {q}");
                }
            }
        }
    }

    #[test]
    fn oma_coverage() {
        let p = NetworkParams::new(1.0, 4.0, 1).unwrap();
        let m =
            moment_downlink(MomentOrder::Real(1.0), 1, &p, &PowerAllocation::oma(), 1.0).unwrap();
        assert!((m.re() - 1.0 / (1.0 + std::f64::consts::FRAC_PI_4)).abs() < 1e-10);
    }

    #[test]
    fn negative_moment_examples() {
        let p = NetworkParams::new(1.0, 4.0, 2).unwrap();
        let t = db(-5.0);
        let b = alloc(&[0.35, 0.65]);
        let d1 = mean_local_delay_downlink(1, &p, &b, t).unwrap();
        let d2 = mean_local_delay_downlink(2, &p, &b, t).unwrap();
        // B(2−c, 1)/B(2, 1) = 2/(2−c);  B(1−c, 2)/B(1, 2) = 2/((1−c)(2−c))
        let c1 = c_coefficient(&b, t, 1).unwrap();
        let c2 = c_coefficient(&b, t, 2).unwrap();
        assert!((d1.re() - 2.0 / (2.0 - c1)).abs() < 1e-12);
        assert!((d2.re() - 2.0 / ((1.0 - c2) * (2.0 - c2))).abs() < 1e-12);
        let b = alloc(&[0.15, 0.85]);
        let d = mean_local_delay_downlink(1, &p, &b, t).unwrap();
        assert_eq!(d.classification, Classification::InfiniteByDelay);
    }

    #[test]
    fn d_continuation_matches_series_at_boundary() {
        for &w in &[0.5f64, 1.5, 2.3] {
            let below = d_coefficient(w, 0.999_999, 0.5).unwrap();
            let above =
                -a_coefficient_with(MomentOrder::Real(-w), 0.999_999, 0.5, APath::Quadrature)
                    .unwrap()
                    .re;
            assert!((below - above).abs() < 1e-6, "w={w}");
        }
    }

    #[test]
    fn threshold_classification() {
        let p = NetworkParams::new(1.0, 4.0, 2).unwrap();
        let b = alloc(&[0.4, 0.6]);
        let z = moment_downlink(MomentOrder::Real(1.0), 2, &p, &b, 1.5).unwrap();
        assert_eq!(z.classification, Classification::ZeroByThreshold);
        let inf = moment_downlink(MomentOrder::Real(-1.0), 2, &p, &b, 1.5).unwrap();
        assert_eq!(inf.classification, Classification::InfiniteByThreshold);
        assert!(matches!(
            moment_downlink(MomentOrder::Imaginary(1.0), 2, &p, &b, 1.5),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn zero_order_and_vanishing_threshold() {
        let p = NetworkParams::new(1.0, 4.0, 2).unwrap();
        let b = alloc(&[0.35, 0.65]);
        assert_eq!(
            moment_downlink(MomentOrder::Real(0.0), 1, &p, &b, 0.3)
                .unwrap()
                .re(),
            1.0
        );
        for m in 1..=2 {
            let v = moment_downlink(MomentOrder::Real(2.0), m, &p, &b, 1e-12).unwrap();
            assert!((v.re() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn imaginary_orders_bounded() {
        let p = NetworkParams::new(1.0, 4.0, 3).unwrap();
        let b = alloc(&[0.17, 0.33, 0.5]);
        for m in 1..=3 {
            for &t in &[0.1, 1.0, 5.0, 40.0, 300.0] {
                let v = moment_downlink(MomentOrder::Imaginary(t), m, &p, &b, db(-3.0)).unwrap();
                assert!(v.value.norm() <= 1.0 + 1e-12, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn f32_tracks_f64() {
        let p64 = NetworkParams::new(1.0, 4.0, 2).unwrap();
        let p32 = NetworkParams::new(1.0f32, 4.0, 2).unwrap();
        let b64 = alloc(&[0.35, 0.65]);
        let b32 = PowerAllocation::new(vec![0.35f32, 0.65]).unwrap();
        for m in 1..=2 {
            let a = moment_downlink(MomentOrder::Real(1.0), m, &p64, &b64, 0.316)
                .unwrap()
                .re();
            let b = moment_downlink(MomentOrder::Real(1.0f32), m, &p32, &b32, 0.316)
                .unwrap()
                .re();
            assert!((a - b as f64).abs() < 1e-5);
        }
    }
}
