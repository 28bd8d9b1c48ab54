//! Fading-averaged conditional success probabilities of one realization.
//!
//! With unit-mean exponential fading each interferer at `x` contributes the
//! factor `1/(1 + t‖x‖^{−α})`, where `t = θ‖x_m‖^α` (uplink) or
//! `t = c_m‖x₀‖^α` (downlink). Interferers beyond the window are replaced by
//! their Poisson average at the given density.

use crate::downlink::{c_coefficient, in_threshold_regime};
use crate::error::{Error, Result};
use crate::model::PowerAllocation;
use crate::specfun::Quadrature;

use super::voronoi::norm2;
use super::{Realization, TypicalLink};

// Partial products are folded into a logarithm every CHUNK factors, which
// keeps them far from under/overflow without a log per factor.
const CHUNK: usize = 64;

/// `ln ∏ 1/(1 + t s_i)` for precomputed `s_i = ‖x_i‖^{−α}`.
pub(crate) fn log_product(t: f64, s: &[f64]) -> f64 {
    let mut log = 0.0;
    for chunk in s.chunks(CHUNK) {
        let mut p = 1.0;
        for &si in chunk {
            p *= 1.0 + t * si;
        }
        log -= p.ln();
    }
    log
}

/// `−ρ ∫_{|x|>W} [1 − 1/(1 + t‖x‖^{−α})] dx`: log of the mean product over
/// a Poisson field of density `ρ` outside the disc of radius `W`.
pub fn tail_log_factor(t: f64, density: f64, window: f64, alpha: f64) -> f64 {
    if t == 0.0 || density == 0.0 {
        return 0.0;
    }
    let u = t * window.powf(-alpha);
    let w2 = window * window;
    let integral = if u < 0.5 {
        // Σ_k (−1)^k u^{k+1} W² / ((k+1)α − 2), alternating and decreasing
        let mut sum = 0.0;
        let mut uk = u;
        for k in 0..200 {
            let term = uk * w2 / ((k as f64 + 1.0) * alpha - 2.0);
            sum += if k % 2 == 0 { term } else { -term };
            if term <= 1e-17 * sum.abs() {
                break;
            }
            uk *= u;
        }
        sum
    } else {
        // y = (W/x)² maps the tail onto (0, 1]
        let q = Quadrature::new(1e-15, 1e-12);
        let f = |y: f64| {
            if y <= 0.0 {
                return 0.0;
            }
            let z = u * y.powf(alpha / 2.0);
            z / (1.0 + z) * w2 / (2.0 * y * y)
        };
        q.integrate_best_effort(f, 0.0, 1.0).value
    };
    -2.0 * std::f64::consts::PI * density * integral
}

fn inverse_powers(points: &[[f64; 2]], alpha: f64) -> Vec<f64> {
    let half = -0.5 * alpha;
    points.iter().map(|p| norm2(*p).powf(half)).collect()
}

/// Uplink CSP of rank `m`: inter-cell interferers and the typical cell's
/// users of rank above `m` (not yet cancelled).
pub fn csp_uplink(real: &Realization, m: usize, theta: f64) -> Result<f64> {
    let s = inverse_powers(&real.interferers, real.alpha);
    Ok(csp_uplink_grid(real, m, &[theta], &s)?[0])
}

pub(crate) fn csp_uplink_grid(
    real: &Realization,
    m: usize,
    thetas: &[f64],
    s: &[f64],
) -> Result<Vec<f64>> {
    let TypicalLink::Uplink { user_distances } = &real.typical else {
        return Err(Error::Domain(
            "uplink CSP needs an uplink realization".into(),
        ));
    };
    if m == 0 || m > user_distances.len() {
        return Err(Error::Domain(format!(
            "rank {m} outside 1..={}",
            user_distances.len()
        )));
    }
    let rm = user_distances[m - 1];
    let rm_a = rm.powf(real.alpha);
    let co: Vec<f64> = user_distances[m..]
        .iter()
        .map(|r| r.powf(-real.alpha))
        .collect();
    Ok(thetas
        .iter()
        .map(|&theta| {
            let t = theta * rm_a;
            let log = log_product(t, s)
                + log_product(t, &co)
                + tail_log_factor(t, real.tail_density, real.window_radius, real.alpha);
            log.exp()
        })
        .collect())
}

/// Downlink CSP of the typical user decoded as rank `m`; zero in the
/// threshold regime.
pub fn csp_downlink(
    real: &Realization,
    m: usize,
    betas: &PowerAllocation<f64>,
    theta: f64,
) -> Result<f64> {
    let s = inverse_powers(&real.interferers, real.alpha);
    Ok(csp_downlink_grid(real, m, betas, &[theta], &s)?[0])
}

pub(crate) fn csp_downlink_grid(
    real: &Realization,
    m: usize,
    betas: &PowerAllocation<f64>,
    thetas: &[f64],
    s: &[f64],
) -> Result<Vec<f64>> {
    let TypicalLink::Downlink {
        serving_distance, ..
    } = real.typical
    else {
        return Err(Error::Domain(
            "downlink CSP needs a downlink realization".into(),
        ));
    };
    let r0_a = serving_distance.powf(real.alpha);
    thetas
        .iter()
        .map(|&theta| {
            if theta == 0.0 {
                return Ok(1.0);
            }
            let c = c_coefficient(betas, theta, m)?;
            if in_threshold_regime(c) {
                return Ok(0.0);
            }
            let t = c * r0_a;
            Ok((log_product(t, s)
                + tail_log_factor(t, real.tail_density, real.window_radius, real.alpha))
            .exp())
        })
        .collect()
}
