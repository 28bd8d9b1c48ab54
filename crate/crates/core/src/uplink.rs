//! Uplink moments of the conditional success probability under the two
//! interferer models.
//!
//! Everything is evaluated in the scale-free variable `s = (5/4)λπr²`, so
//! the results do not depend on the BS density.
//!
//! * Intra-cell factor (ranks above `m` are not cancelled):
//!   `J_b(s) = ∫₀^∞ e^{−v} (1 + θ(1 + v/s)^{−α/2})^{−b} dv`.
//! * Inter-cell factor with `q = λπr²`:
//!   `exp{−K q ∫₀^∞ [1 − (1 + θu^{−α/2})^{−e}] (1 − e^{−(12/5) q u}) du}`,
//!   with `(K, e) = (1, Nb)` for Model 1 and `(N, b)` for Model 2.
//!
//! The interference expectation is conditioned on the serving distance but
//! the model intensities are not (no exclusion ball), exactly as the models
//! are stated.

use std::cell::{Cell, RefCell};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{scaled_quantile, PCF_RATE, UPLINK_AREA_FACTOR};
use crate::model::{Classification, InterfererModel, MomentOrder, MomentValue, NetworkParams};
use crate::specfun::{expm1_complex, ln1p_complex, ln_beta, Quadrature};
use crate::Scalar;

/// Tail mass dropped by truncating the outer integral.
const OUTER_TAIL: f64 = 1e-8;

/// One uplink moment query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct UplinkMomentRequest<T> {
    pub b: MomentOrder<T>,
    pub m: usize,
    pub theta: T,
    pub params: NetworkParams<T>,
    pub model: InterfererModel,
}

// Purely imaginary orders only feed the Gil-Pelaez inversion, which needs
// about seven digits; they oscillate hard for large |t|, so they get looser
// tolerances than real orders.
fn inner_quad<T: Scalar>(b: Complex<T>) -> Quadrature<T> {
    if b.re == T::zero() {
        Quadrature::new(T::tol(1e-11), T::tol(1e-9)).with_max_subdivisions(4000)
    } else {
        Quadrature::new(T::tol(1e-13), T::tol(1e-12)).with_max_subdivisions(4000)
    }
}

fn outer_quad<T: Scalar>(b: Complex<T>) -> Quadrature<T> {
    if b.re == T::zero() {
        Quadrature::new(T::tol(1e-9), T::tol(1e-7)).with_max_subdivisions(2000)
    } else {
        Quadrature::new(T::tol(1e-12), T::tol(1e-10)).with_max_subdivisions(2000)
    }
}

/// Accepts a result that missed its tolerance by at most a factor of 100,
/// which is still far below what any caller can resolve.
fn integrate_lenient<T, F>(quad: &Quadrature<T>, f: F, lo: T, hi: T) -> Result<Complex<T>>
where
    T: Scalar,
    F: FnMut(T) -> Complex<T>,
{
    let est = quad.integrate_best_effort(f, lo, hi);
    let allowed = quad.threshold(est.value.norm()) * T::lit(100.0);
    if est.error <= allowed {
        Ok(est.value)
    } else {
        Err(Error::Quadrature {
            estimate: est.value.norm().as_f64(),
            error_bound: est.error.as_f64(),
        })
    }
}

// (1 + y)^{−b} for y ≥ 0 on the principal branch.
#[inline]
fn pow_neg<T: Scalar>(y: T, b: Complex<T>) -> Complex<T> {
    (b * (-y.ln_1p())).exp()
}

/// Orders with `|Im b|` at least this large are integrated along a ray.
const RAY_MIN_IMAG: f64 = 2.0;

/// Phase sweep (radians) above which the intra-cell factor uses the ray.
const J_RAY_MIN_SWEEP: f64 = 25.0;

/// Unit direction `e^{±jπ/α}` (sign of `Im b`) for strongly oscillating
/// orders with `Re b ≥ 0`.
///
/// Inside the sector `0 ≤ ±arg w ≤ π/α` the quantity `1 + (·)^{−α/2}` keeps
/// a non-positive (resp. non-negative) argument, so `(1 + ·)^{−b}` is analytic
/// there and decays instead of oscillating; the integrands also vanish on the
/// closing arcs, hence the ray gives the same value as the real axis.
fn ray<T: Scalar>(b: Complex<T>, alpha: T) -> Option<Complex<T>> {
    if b.re < T::zero() || b.im.abs() < T::lit(RAY_MIN_IMAG) {
        return None;
    }
    let phi = T::PI() / alpha;
    Some(Complex::new(phi.cos(), phi.sin() * b.im.signum()))
}

/// `J_b(x; z) = ∫₀^∞ e^{−v} (1 + z(1 + v/x)^{−α/2})^{−b} dv`.
pub fn intra_cell_factor<T: Scalar>(b: Complex<T>, x: T, z: T, alpha: T) -> Result<Complex<T>> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!(
            "intra-cell factor requires x > 0, got {x}"
        )));
    }
    if z == T::zero() || b == Complex::new(T::zero(), T::zero()) {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    let half_alpha = alpha / T::lit(2.0);
    // On the real axis the phase of the integrand sweeps at most
    // |Im b|·ln(1 + z); only rotate when that is many turns.
    let sweep = b.im.abs() * z.ln_1p();
    if let Some(w) = ray(b, alpha).filter(|_| sweep > T::lit(J_RAY_MIN_SWEEP)) {
        let one = Complex::new(T::one(), T::zero());
        let f = |r: T| -> Complex<T> {
            let v = w * r;
            let y = ((one + v / x).ln() * (-half_alpha)).exp() * z;
            (-(b * ln1p_complex(y)) - v).exp() * w
        };
        return integrate_lenient(&inner_quad(b), f, T::zero(), T::infinity());
    }
    let f = |v: T| -> Complex<T> {
        let y = z * (T::one() + v / x).powf(-half_alpha);
        pow_neg(y, b) * (-v).exp()
    };
    integrate_lenient(&inner_quad(b), f, T::zero(), T::infinity())
}

/// `μ_b(x, z) = ∫₀¹ t^{−3} e^{−x t^{−2}} (1 + z t^α)^{−b} dt`.
pub fn mu_integral<T: Scalar>(b: MomentOrder<T>, x: T, z: T, alpha: T) -> Result<Complex<T>> {
    if z < T::zero() {
        return Err(Error::Domain(format!("μ requires z >= 0, got {z}")));
    }
    let j = intra_cell_factor(b.as_complex(), x, z, alpha)?;
    Ok(j * ((-x).exp() / (T::lit(2.0) * x)))
}

/// Log of the inter-cell interference factor at `q = λπr²`, or `None` when
/// the defining integral diverges (large negative orders).
fn interference_log<T: Scalar>(
    b: Complex<T>,
    q: T,
    theta: T,
    alpha: T,
    n_users: usize,
    model: InterfererModel,
) -> Result<Option<Complex<T>>> {
    if q == T::zero() || theta == T::zero() || b == Complex::new(T::zero(), T::zero()) {
        return Ok(Some(Complex::new(T::zero(), T::zero())));
    }
    let n = T::from_count(n_users);
    let (k, e) = match model {
        InterfererModel::Model1 => (T::one(), b * n),
        InterfererModel::Model2 => (n, b),
    };
    let half_alpha = alpha / T::lit(2.0);
    // Near u = 0 the bracket behaves like −θ^{−e} u^{e α/2}; with the
    // (1 − e^{−kqu}) ~ u factor the integral converges iff Re(e)·α/2 > −2.
    if e.re * half_alpha <= -T::lit(2.0) {
        return Ok(None);
    }
    let rate = T::lit(PCF_RATE) * q;
    let quad = inner_quad(b);
    // u = w^{−γ} with γ = 1/(α/2 − 1) turns the algebraic tail into a
    // bounded integrand on (0, 1].
    let gamma = (half_alpha - T::one()).recip();
    if let Some(w) = ray(e, alpha) {
        // u = r·w along the ray; du = w dr.
        let zero = Complex::new(T::zero(), T::zero());
        let g = |r: T| -> Complex<T> {
            if r <= T::zero() {
                return zero;
            }
            let u = w * r;
            let y = (u.ln() * (-half_alpha)).exp() * theta;
            let bracket = -expm1_complex(-(e * ln1p_complex(y)));
            bracket * (-expm1_complex(u * (-rate))) * w
        };
        let head = integrate_lenient(&quad, g, T::zero(), T::one())?;
        // as s → 0: e θ γ w^{1 − α/2}
        let limit = e * (w.ln() * (T::one() - half_alpha)).exp() * (theta * gamma);
        let tail_fn = |s: T| -> Complex<T> {
            if s <= T::zero() {
                return limit;
            }
            g(s.powf(-gamma)) * (gamma * s.powf(-gamma - T::one()))
        };
        let tail = integrate_lenient(&quad, tail_fn, T::zero(), T::one())?;
        return Ok(Some((head + tail) * (-k * q)));
    }
    let g = |u: T| -> Complex<T> {
        if u <= T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let y = theta * u.powf(-half_alpha);
        let bracket = -expm1_complex(e * (-y.ln_1p()));
        bracket * (-(-rate * u).exp_m1())
    };
    let head = integrate_lenient(&quad, g, T::zero(), T::one())?;
    let tail_fn = |w: T| -> Complex<T> {
        if w <= T::zero() {
            // bracket ~ e θ u^{−α/2}, du = γ w^{−γ−1} dw  ⇒  e θ γ
            return e * (theta * gamma);
        }
        let u = w.powf(-gamma);
        g(u) * (gamma * w.powf(-gamma - T::one()))
    };
    let tail = integrate_lenient(&quad, tail_fn, T::zero(), T::one())?;
    Ok(Some((head + tail) * (-k * q)))
}

/// Inter-cell interference factor at serving distance `r`.
pub fn interference_factor<T: Scalar>(
    b: MomentOrder<T>,
    r: T,
    theta: T,
    params: &NetworkParams<T>,
    model: InterfererModel,
) -> Result<Complex<T>> {
    params.validate()?;
    if r < T::zero() {
        return Err(Error::Domain(format!(
            "distance must be non-negative, got {r}"
        )));
    }
    let q = params.lambda_b * T::PI() * r * r;
    match interference_log(
        b.as_complex(),
        q,
        theta,
        params.alpha,
        params.n_users,
        model,
    )? {
        Some(l) => Ok(l.exp()),
        None => Ok(Complex::new(T::infinity(), T::zero())),
    }
}

/// `M_b` of the rank-`m` uplink user.
pub fn moment_uplink<T: Scalar>(req: &UplinkMomentRequest<T>) -> Result<MomentValue<T>> {
    let p = &req.params;
    p.validate()?;
    p.check_rank(req.m)?;
    if !(req.theta >= T::zero()) {
        return Err(Error::Domain(format!(
            "threshold must be non-negative, got {}",
            req.theta
        )));
    }
    let b = req.b.as_complex();
    if b == Complex::new(T::zero(), T::zero()) || req.theta == T::zero() {
        return Ok(MomentValue::real(T::one()));
    }
    let n = p.n_users;
    let m = req.m;
    let area = T::lit(UPLINK_AREA_FACTOR);
    let ln_norm = ln_beta(T::from_count(n - m + 1), T::from_count(m))?;
    let s_max = scaled_quantile::<T>(n, T::lit(OUTER_TAIL));

    let diverged = Cell::new(false);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |s: T| -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        if s <= T::zero() || diverged.get() || failure.borrow().is_some() {
            return zero;
        }
        let q = s / area;
        let il = match interference_log(b, q, req.theta, p.alpha, n, req.model) {
            Ok(Some(l)) => l,
            Ok(None) => {
                diverged.set(true);
                return zero;
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                return zero;
            }
        };
        let mut log_val = il - Complex::new(ln_norm, T::zero());
        if n > m {
            match intra_cell_factor(b, s, req.theta, p.alpha) {
                Ok(j) => log_val += j.ln() * T::from_count(n - m),
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    return zero;
                }
            }
        }
        // ranked density in s: (1 − e^{−s})^{m−1} e^{−s(N−m+1)} / B(N−m+1, m)
        let below = -(-s).exp_m1();
        let ld = T::from_count(m - 1) * below.ln() - s * T::from_count(n - m + 1);
        (log_val + ld).exp()
    };
    let est = integrate_lenient(&outer_quad(b), integrand, T::zero(), s_max);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if diverged.get() {
        return Ok(MomentValue::infinite(Classification::InfiniteByDelay));
    }
    let est = est?;
    if b.re < T::zero() {
        // A negative moment whose integrand has not decayed at the truncation
        // point diverges with the truncation radius.
        let at_end = integrand(s_max).norm();
        let at_mid = integrand(s_max / T::lit(2.0)).norm();
        if !est.norm().is_finite() || at_end >= at_mid {
            return Ok(MomentValue::infinite(Classification::InfiniteByDelay));
        }
    }
    Ok(MomentValue::finite(est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::Quadrature;

    fn db(x: f64) -> f64 {
        10f64.powf(x / 10.0)
    }

    fn req(m: usize, theta: f64, lambda: f64, model: InterfererModel) -> UplinkMomentRequest<f64> {
        UplinkMomentRequest {
            b: MomentOrder::Real(1.0),
            m,
            theta,
            params: NetworkParams::new(lambda, 4.0, 3).unwrap(),
            model,
        }
    }

    #[test]
    fn mu_closed_forms() {
        for &x in &[0.01f64, 0.7, 5.0] {
            let exact = (-x).exp() / (2.0 * x);
            let v = mu_integral(MomentOrder::Real(2.0), x, 0.0, 4.0).unwrap();
            assert!((v.re - exact).abs() < 1e-14 * exact.max(1.0));
            let v = mu_integral(MomentOrder::Real(0.0), x, 3.0, 4.0).unwrap();
            assert!((v.re - exact).abs() < 1e-14 * exact.max(1.0));
        }
    }

    #[test]
    fn mu_matches_original_form() {
        // compare against the untransformed t-integral
        let (x, z, alpha, b) = (0.8f64, 1.7f64, 3.5f64, 1.3f64);
        let direct = Quadrature::new(1e-14, 1e-12)
            .integrate(
                |t: f64| {
                    if t <= 0.0 {
                        0.0
                    } else {
                        t.powi(-3) * (-x / (t * t)).exp() * (1.0 + z * t.powf(alpha)).powf(-b)
                    }
                },
                0.0,
                1.0,
            )
            .unwrap()
            .value;
        let v = mu_integral(MomentOrder::Real(b), x, z, alpha).unwrap();
        assert!((v.re - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn interference_trivial_cases() {
        let p = NetworkParams::new(0.01, 4.0, 3).unwrap();
        for model in [InterfererModel::Model1, InterfererModel::Model2] {
            let one = interference_factor(MomentOrder::Real(1.0), 3.0, 0.0, &p, model).unwrap();
            assert_eq!(one, Complex::new(1.0, 0.0));
            let one = interference_factor(MomentOrder::Real(1.0), 0.0, 0.5, &p, model).unwrap();
            assert_eq!(one, Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn interference_matches_physical_integral() {
        // direct x-integral of the Model 1 exponent
        let p = NetworkParams::new(0.02, 4.0, 3).unwrap();
        let (r, theta) = (4.0f64, 0.6f64);
        let lam = p.lambda_b;
        let integrand = |x: f64| {
            let y = theta * r.powi(4) * x.powi(-4);
            -(-3.0 * y.ln_1p()).exp_m1()
                * (1.0 - (-2.4 * lam * std::f64::consts::PI * x * x).exp())
                * x
        };
        let q = Quadrature::new(1e-12, 1e-12);
        let i = q.integrate(integrand, 0.0, 4.0 * r).unwrap().value
            + q.integrate(integrand, 4.0 * r, f64::INFINITY)
                .unwrap()
                .value;
        let exact = (-2.0 * std::f64::consts::PI * lam * i).exp();
        let v = interference_factor(
            MomentOrder::Real(1.0),
            r,
            theta,
            &p,
            InterfererModel::Model1,
        )
        .unwrap();
        assert!((v.re - exact).abs() < 1e-10, "{} vs {exact}", v.re);
    }

    #[test]
    fn model_two_interferes_more() {
        let p = NetworkParams::new(0.01, 4.0, 3).unwrap();
        for &r in &[1.0, 5.0, 12.0] {
            for &t in &[0.1, 1.0, 3.0] {
                let m1 =
                    interference_factor(MomentOrder::Real(1.0), r, t, &p, InterfererModel::Model1)
                        .unwrap();
                let m2 =
                    interference_factor(MomentOrder::Real(1.0), r, t, &p, InterfererModel::Model2)
                        .unwrap();
                assert!(m2.norm() <= m1.norm() + 1e-15);
            }
        }
    }

    #[test]
    fn vanishing_threshold() {
        let v = moment_uplink(&req(2, 1e-9, 1e-3, InterfererModel::Model1)).unwrap();
        assert!((v.re() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ranks_ordered_and_models_ordered() {
        let t = db(-5.0);
        let mut prev = 1.0;
        for m in 1..=3 {
            let a = moment_uplink(&req(m, t, 1e-3, InterfererModel::Model1))
                .unwrap()
                .re();
            let b = moment_uplink(&req(m, t, 1e-3, InterfererModel::Model2))
                .unwrap()
                .re();
            assert!(b <= a + 1e-12, "m={m}: {b} > {a}");
            assert!(a <= prev);
            prev = a;
        }
    }

    #[test]
    fn density_independent() {
        for model in [InterfererModel::Model1, InterfererModel::Model2] {
            let base = moment_uplink(&req(2, 0.5, 1e-3, model)).unwrap().re();
            for k in [0.25, 4.0] {
                let v = moment_uplink(&req(2, 0.5, 1e-3 * k, model)).unwrap().re();
                assert!((v - base).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn imaginary_orders_bounded() {
        for &t in &[0.5, 4.0, 30.0] {
            let mut r = req(1, 0.3, 1e-3, InterfererModel::Model2);
            r.b = MomentOrder::Imaginary(t);
            assert!(moment_uplink(&r).unwrap().value.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn strongly_negative_order_diverges() {
        let mut r = req(1, 0.3, 1e-3, InterfererModel::Model1);
        r.b = MomentOrder::Real(-1.0);
        assert_eq!(
            moment_uplink(&r).unwrap().classification,
            Classification::InfiniteByDelay
        );
    }

    fn real_axis_j(b: Complex<f64>, x: f64, z: f64, alpha: f64) -> Complex<f64> {
        Quadrature::new(1e-13, 1e-12)
            .with_max_subdivisions(20_000)
            .integrate(
                |v: f64| {
                    let y = z * (1.0 + v / x).powf(-alpha / 2.0);
                    (b * -(y.ln_1p())).exp() * (-v).exp()
                },
                0.0,
                f64::INFINITY,
            )
            .unwrap()
            .value
    }

    fn real_axis_interference(e: Complex<f64>, q: f64, theta: f64, alpha: f64) -> Complex<f64> {
        let rate = PCF_RATE * q;
        Quadrature::new(1e-13, 1e-12)
            .with_max_subdivisions(20_000)
            .integrate(
                |u: f64| {
                    if u <= 0.0 {
                        return Complex::new(0.0, 0.0);
                    }
                    let y = theta * u.powf(-alpha / 2.0);
                    -expm1_complex(e * -(y.ln_1p())) * -(-rate * u).exp_m1()
                },
                0.0,
                f64::INFINITY,
            )
            .unwrap()
            .value
    }

    #[test]
    fn rotated_intra_cell_factor_matches_real_axis() {
        for &(b, x, z, alpha) in &[
            (Complex::new(0.0, 6.0), 0.8, 2.0, 4.0),
            (Complex::new(0.0, -15.0), 3.0, 0.4, 4.0),
            (Complex::new(0.7, 9.0), 0.2, 5.0, 3.2),
        ] {
            let ray = intra_cell_factor(b, x, z, alpha).unwrap();
            let direct = real_axis_j(b, x, z, alpha);
            assert!((ray - direct).norm() < 1e-9, "{b}: {ray} vs {direct}");
        }
    }

    #[test]
    fn rotated_interference_matches_real_axis() {
        for &(b, q, theta, alpha, model) in &[
            (
                Complex::new(0.0, 3.0),
                0.5,
                0.3,
                4.0,
                InterfererModel::Model1,
            ),
            (
                Complex::new(0.0, -8.0),
                2.0,
                1.5,
                4.0,
                InterfererModel::Model2,
            ),
            (
                Complex::new(0.4, 5.0),
                0.1,
                0.8,
                3.5,
                InterfererModel::Model2,
            ),
        ] {
            let n = 3usize;
            let (k, e) = match model {
                InterfererModel::Model1 => (1.0, b * n as f64),
                InterfererModel::Model2 => (n as f64, b),
            };
            let ray = interference_log(b, q, theta, alpha, n, model)
                .unwrap()
                .unwrap();
            let direct = real_axis_interference(e, q, theta, alpha) * (-k * q);
            assert!(
                (ray - direct).norm() < 1e-8 * direct.norm().max(1.0),
                "{b}: {ray} vs {direct}"
            );
        }
    }

    #[test]
    fn large_imaginary_orders_converge() {
        for model in [InterfererModel::Model1, InterfererModel::Model2] {
            let mut r = req(1, 0.3, 1.0, model);
            r.b = MomentOrder::Imaginary(2000.0);
            let a = moment_uplink(&r).unwrap().value;
            r.b = MomentOrder::Imaginary(-2000.0);
            let c = moment_uplink(&r).unwrap().value;
            assert!(a.norm() < 0.1);
            assert!((a - c.conj()).norm() < 1e-8);
        }
    }
}
