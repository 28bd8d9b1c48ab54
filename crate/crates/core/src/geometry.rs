//! Link-distance laws, ranked and conditional distance densities, the fitted
//! BS/user pair-correlation function, and the first and second moment
//! measures of the two interferer models.
//!
//! The uplink base law is the fitted Rayleigh-like law with the `5/4` area
//! inflation; it is used for every cluster size as a modeling approximation.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{Direction, InterfererModel, NetworkParams};
use crate::specfun::ln_beta;
use crate::Scalar;

/// Area inflation of the uplink user-to-BS distance law.
pub const UPLINK_AREA_FACTOR: f64 = 1.25;
/// Rate constant of the exponential pair-correlation fit.
pub const PCF_RATE: f64 = 2.4;

/// Which side of the conditioning distance a neighbour lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Lower ranks: `r <= r_m`.
    In,
    /// Higher ranks: `r >= r_m`.
    Out,
}

/// Density and distribution function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfCdf<T> {
    pub pdf: T,
    pub cdf: T,
}

fn area_factor<T: Scalar>(direction: Direction) -> T {
    match direction {
        Direction::Uplink => T::lit(UPLINK_AREA_FACTOR),
        Direction::Downlink => T::one(),
    }
}

fn rayleigh<T: Scalar>(r: T, rate: T) -> PdfCdf<T> {
    if r < T::zero() {
        return PdfCdf {
            pdf: T::zero(),
            cdf: T::zero(),
        };
    }
    let e = -rate * r * r;
    PdfCdf {
        pdf: T::lit(2.0) * rate * r * e.exp(),
        cdf: -e.exp_m1(),
    }
}

/// Uplink user-to-serving-BS distance law.
pub fn uplink_link_dist<T: Scalar>(r: T, params: &NetworkParams<T>) -> PdfCdf<T> {
    base_dist(r, params, Direction::Uplink)
}

/// Downlink serving distance (Rayleigh).
pub fn downlink_link_dist<T: Scalar>(r: T, params: &NetworkParams<T>) -> PdfCdf<T> {
    base_dist(r, params, Direction::Downlink)
}

/// Base distance law for the given direction.
pub fn base_dist<T: Scalar>(r: T, params: &NetworkParams<T>, direction: Direction) -> PdfCdf<T> {
    let rate = area_factor::<T>(direction) * params.lambda_b * T::PI();
    rayleigh(r, rate)
}

/// Density of the distance of the rank-`m` user among `N` i.i.d. users.
pub fn ranked_dist_pdf<T: Scalar>(
    r: T,
    m: usize,
    params: &NetworkParams<T>,
    direction: Direction,
) -> Result<T> {
    params.check_rank(m)?;
    if r <= T::zero() {
        return Ok(T::zero());
    }
    let n = params.n_users;
    let rate = area_factor::<T>(direction) * params.lambda_b * T::PI();
    let s = rate * r * r;
    let below = -(-s).exp_m1(); // F(r)
    let log_pdf = (T::lit(2.0) * rate * r).ln() - s * T::from_count(n - m + 1)
        + T::from_count(m - 1) * below.ln()
        - ln_beta(T::from_count(n - m + 1), T::from_count(m))?;
    Ok(if m > 1 && below == T::zero() {
        T::zero()
    } else {
        log_pdf.exp()
    })
}

/// Radius beyond which the rank-`m` density carries less than `tail` mass.
///
/// Uses `P(R_m > r) <= 2^N (1 - F(r))`.
pub fn ranked_quantile_radius<T: Scalar>(
    params: &NetworkParams<T>,
    direction: Direction,
    tail: T,
) -> T {
    let s = scaled_quantile::<T>(params.n_users, tail);
    let rate = area_factor::<T>(direction) * params.lambda_b * T::PI();
    (s / rate).sqrt()
}

/// The same cap in the scale-free variable `s = rate·r²`.
pub fn scaled_quantile<T: Scalar>(n_users: usize, tail: T) -> T {
    -tail.ln() + T::from_count(n_users) * T::LN_2()
}

/// Density of another co-cell user's distance given the rank-`m` distance
/// `rm` and the side it lies on.
pub fn conditional_neighbor_pdf<T: Scalar>(
    r: T,
    rm: T,
    side: Side,
    params: &NetworkParams<T>,
    direction: Direction,
) -> Result<T> {
    let base = base_dist(r, params, direction);
    let at_rm = base_dist(rm, params, direction).cdf;
    match side {
        Side::In => {
            if rm <= T::zero() {
                return Err(domain("inner neighbour law has empty support at r_m = 0"));
            }
            Ok(if r < T::zero() || r > rm {
                T::zero()
            } else {
                base.pdf / at_rm
            })
        }
        Side::Out => Ok(if r < rm {
            T::zero()
        } else {
            base.pdf / (T::one() - at_rm)
        }),
    }
}

/// Exponential fit of the BS/user pair-correlation function.
pub fn pcf_fit<T: Scalar>(r: T, params: &NetworkParams<T>) -> T {
    -(-T::lit(PCF_RATE) * params.lambda_b * T::PI() * r * r).exp_m1()
}

/// Mean number of inter-cell interferers within distance `r` of the typical
/// BS (identical for both models).
pub fn model_intensity_measure<T: Scalar>(r: T, params: &NetworkParams<T>) -> T {
    let lam = params.lambda_b;
    let q = lam * T::PI() * r * r;
    let k = T::lit(PCF_RATE);
    // q - (1 - e^{-kq})/k, evaluated without cancellation for small q
    let kq = k * q;
    let inner = if kq < T::lit(1e-3) {
        // q - (kq - (kq)^2/2 + (kq)^3/6 - ...)/k
        q * (kq / T::lit(2.0) - kq * kq / T::lit(6.0) + kq * kq * kq / T::lit(24.0))
    } else {
        q + (-kq).exp_m1() / k
    };
    T::from_count(params.n_users) * inner
}

/// Second moment measure `E[Φ_I(b(o,r))²]` under the chosen model.
pub fn model_second_moment<T: Scalar>(
    r: T,
    params: &NetworkParams<T>,
    model: InterfererModel,
) -> T {
    let l = model_intensity_measure(r, params);
    match model {
        InterfererModel::Model1 => l * (T::from_count(params.n_users) + l),
        InterfererModel::Model2 => l * (l + T::one()),
    }
}

/// Normalized root second moment `√E[Φ_I²] / (Nλ)`.
pub fn rho<T: Scalar>(r: T, params: &NetworkParams<T>, model: InterfererModel) -> T {
    model_second_moment(r, params, model).sqrt() / (T::from_count(params.n_users) * params.lambda_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::Quadrature;
    use proptest::prelude::*;

    fn params(lambda: f64, n: usize) -> NetworkParams<f64> {
        NetworkParams::new(lambda, 4.0, n).unwrap()
    }

    #[test]
    fn uplink_median() {
        let p = params(1.0, 1);
        let r = (2f64.ln() / (1.25 * std::f64::consts::PI)).sqrt();
        assert!((uplink_link_dist(r, &p).cdf - 0.5).abs() < 1e-14);
        assert_eq!(uplink_link_dist(0.0, &p).cdf, 0.0);
        assert!((uplink_link_dist(1e3, &p).cdf - 1.0).abs() < 1e-15);
    }

    #[test]
    fn downlink_median() {
        let p = params(1.0, 1);
        let r = (2f64.ln() / std::f64::consts::PI).sqrt();
        assert!((downlink_link_dist(r, &p).cdf - 0.5).abs() < 1e-14);
        assert_eq!(downlink_link_dist(0.0, &p).pdf, 0.0);
    }

    #[test]
    fn ranked_reduces_to_base_for_single_user() {
        let p = params(0.3, 1);
        for &r in &[0.1, 0.5, 1.3] {
            for dir in [Direction::Uplink, Direction::Downlink] {
                let a = ranked_dist_pdf(r, 1, &p, dir).unwrap();
                let b = base_dist(r, &p, dir).pdf;
                assert!((a - b).abs() < 1e-13 * b.max(1.0));
            }
        }
    }

    #[test]
    fn densities_normalize() {
        let q = Quadrature::new(1e-12, 1e-12);
        for n in 1..=5 {
            let p = params(0.7, n);
            for m in 1..=n {
                for dir in [Direction::Uplink, Direction::Downlink] {
                    let v = q
                        .integrate(
                            |r| ranked_dist_pdf(r, m, &p, dir).unwrap(),
                            0.0,
                            f64::INFINITY,
                        )
                        .unwrap()
                        .value;
                    assert!((v - 1.0).abs() < 1e-8, "n={n} m={m} {dir:?}: {v}");
                }
            }
        }
        let p = params(0.7, 3);
        let rm = 0.8;
        let inner = q
            .integrate(
                |r| conditional_neighbor_pdf(r, rm, Side::In, &p, Direction::Uplink).unwrap(),
                0.0,
                rm,
            )
            .unwrap()
            .value;
        let outer = q
            .integrate(
                |r| conditional_neighbor_pdf(r, rm, Side::Out, &p, Direction::Uplink).unwrap(),
                rm,
                f64::INFINITY,
            )
            .unwrap()
            .value;
        assert!((inner - 1.0).abs() < 1e-8 && (outer - 1.0).abs() < 1e-8);
    }

    #[test]
    fn conditional_edge_cases() {
        let p = params(1.0, 3);
        assert!(conditional_neighbor_pdf(0.1, 0.0, Side::In, &p, Direction::Uplink).is_err());
        let v = conditional_neighbor_pdf(0.4, 0.0, Side::Out, &p, Direction::Uplink).unwrap();
        assert!((v - uplink_link_dist(0.4, &p).pdf).abs() < 1e-15);
    }

    #[test]
    fn quantile_radius_bounds_tail() {
        let p = params(2.0, 4);
        let rmax = ranked_quantile_radius(&p, Direction::Uplink, 1e-8);
        let q = Quadrature::new(1e-14, 1e-10);
        for m in 1..=4 {
            let tail = q
                .integrate(
                    |r| ranked_dist_pdf(r, m, &p, Direction::Uplink).unwrap(),
                    rmax,
                    f64::INFINITY,
                )
                .unwrap()
                .value;
            assert!(tail <= 1e-8, "m={m}: {tail}");
        }
    }

    #[test]
    fn pcf_limits() {
        let p = params(1.0, 2);
        assert_eq!(pcf_fit(0.0, &p), 0.0);
        assert!((pcf_fit(10.0, &p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn intensity_measure_consistent_with_pcf() {
        let p = params(1.3, 3);
        let n_lam = 3.0 * 1.3;
        for &r in &[0.01, 0.1, 0.4, 1.0, 2.5] {
            let h = 1e-5 * r;
            let d = (model_intensity_measure(r + h, &p) - model_intensity_measure(r - h, &p))
                / (2.0 * h);
            let g = d / (2.0 * std::f64::consts::PI * r);
            assert!((g - n_lam * pcf_fit(r, &p)).abs() < 1e-8, "r={r}");
        }
        assert_eq!(model_intensity_measure(0.0, &p), 0.0);
        let r = 30.0;
        let slope = model_intensity_measure(r, &p) / (n_lam * std::f64::consts::PI * r * r);
        assert!((slope - 1.0).abs() < 1e-3);
    }

    #[test]
    fn second_moment_models() {
        let p = params(1.0, 3);
        for &r in &[0.0, 0.5, 1.0, 2.0] {
            let l = model_intensity_measure(r, &p);
            let m1 = model_second_moment(r, &p, InterfererModel::Model1);
            let m2 = model_second_moment(r, &p, InterfererModel::Model2);
            assert!((m1 - m2 - l * 2.0).abs() < 1e-12 * m1.max(1.0));
            assert!(rho(r, &p, InterfererModel::Model1) >= rho(r, &p, InterfererModel::Model2));
        }
        assert_eq!(rho(0.0, &p, InterfererModel::Model1), 0.0);
        let p1 = params(1.0, 1);
        assert_eq!(
            model_second_moment(0.7, &p1, InterfererModel::Model1),
            model_second_moment(0.7, &p1, InterfererModel::Model2)
        );
    }

    proptest! {
        #[test]
        fn ranked_scale_invariance(m in 1usize..=4, u in 0.01f64..3.0, kappa in 0.05f64..20.0) {
            // f_{R_m}(r; λ) dr is invariant under r ↦ r/√κ, λ ↦ κλ
            let p = params(1.0, 4);
            let pk = p.with_lambda(kappa);
            let a = ranked_dist_pdf(u, m, &p, Direction::Uplink).unwrap();
            let b = ranked_dist_pdf(u / kappa.sqrt(), m, &pk, Direction::Uplink).unwrap() / kappa.sqrt();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }

        #[test]
        fn intensity_monotone(r in 0.0f64..5.0, dr in 0.0f64..1.0) {
            let p = params(0.8, 2);
            prop_assert!(model_intensity_measure(r + dr, &p) >= model_intensity_measure(r, &p));
        }
    }
}
