//! Estimators over many realizations.
//!
//! Realizations are processed in fixed-size index blocks on a local worker
//! pool; block results are concatenated in index order and every reduction
//! is a sequential pass over that order, so the output never depends on the
//! number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::model_intensity_measure;
use crate::metadist::{MetaCurve, MetaKind};
use crate::model::Direction;

use super::csp::{csp_downlink_grid, csp_uplink_grid};
use super::voronoi::norm2;
use super::{sample_realization, Realization, SimConfig, TypicalLink};

/// CSPs below this are floored when estimating negative moments.
pub const CSP_FLOOR: f64 = 1e-12;

const BLOCK: usize = 64;

/// Ordered parallel map over realization indices.
pub(crate) fn map_realizations<R, F>(
    config: &SimConfig,
    threads: Option<usize>,
    f: F,
) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, &Realization) -> Result<R> + Sync,
{
    config.validate()?;
    let blocks: Vec<(usize, usize)> = (0..config.realizations)
        .step_by(BLOCK)
        .map(|s| (s, (s + BLOCK).min(config.realizations)))
        .collect();
    let work = || -> Result<Vec<R>> {
        let parts: Vec<Result<Vec<R>>> = blocks
            .par_iter()
            .map(|&(s, e)| {
                (s..e)
                    .map(|i| {
                        let real = sample_realization(config, i)?;
                        f(i, &real)
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(config.realizations);
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.filter(|n| *n > 0) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Domain(format!("worker pool: {e}")))?;
    pool.install(work)
}

/// Per-rank, per-threshold CSP samples: `samples[m−1][θ index]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CspTable {
    pub samples: Vec<Vec<Vec<f64>>>,
}

impl CspTable {
    /// Samples of rank `m` at threshold index `k`.
    pub fn get(&self, m: usize, k: usize) -> Result<&[f64]> {
        self.samples
            .get(m.wrapping_sub(1))
            .and_then(|r| r.get(k))
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Domain(format!("no samples for rank {m}, threshold index {k}")))
    }
}

/// Completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub config: SimConfig,
    pub table: CspTable,
}

/// Simulates every realization and tabulates the CSPs on the threshold grid.
///
/// Uplink realizations contribute to every rank; a downlink realization
/// contributes to the rank its typical user happens to have.
pub fn run(config: &SimConfig, threads: Option<usize>) -> Result<SimRun> {
    let n = config.params.n_users;
    let thetas = &config.theta_grid;
    let rows = map_realizations(config, threads, |_, real| {
        let half = -0.5 * real.alpha;
        let s: Vec<f64> = real
            .interferers
            .iter()
            .map(|p| norm2(*p).powf(half))
            .collect();
        match &real.typical {
            TypicalLink::Uplink { .. } => (1..=n)
                .map(|m| Ok((m, csp_uplink_grid(real, m, thetas, &s)?)))
                .collect::<Result<Vec<_>>>(),
            TypicalLink::Downlink { rank, .. } => {
                let betas = config.betas.as_ref().ok_or_else(|| {
                    Error::Domain("downlink simulation needs power fractions".into())
                })?;
                Ok(vec![(
                    *rank,
                    csp_downlink_grid(real, *rank, betas, thetas, &s)?,
                )])
            }
        }
    })?;
    let mut samples = vec![vec![Vec::new(); thetas.len()]; n];
    for (m, values) in rows.into_iter().flatten() {
        for (k, v) in values.into_iter().enumerate() {
            samples[m - 1][k].push(v);
        }
    }
    Ok(SimRun {
        config: config.clone(),
        table: CspTable { samples },
    })
}

/// Sample estimate of `E[P^b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentEstimate {
    pub order: f64,
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Share of samples below [`CSP_FLOOR`] (negative orders only).
    pub floored_fraction: f64,
    /// Set when floored samples carry more than a tenth of the estimate.
    pub unreliable: bool,
}

fn moment_of(values: &[f64], b: f64) -> MomentEstimate {
    let n = values.len();
    if b == 0.0 {
        return MomentEstimate {
            order: b,
            mean: 1.0,
            std_error: 0.0,
            samples: n,
            floored_fraction: 0.0,
            unreliable: false,
        };
    }
    let mut floored = 0usize;
    let mut floored_mass = 0.0;
    let pow: Vec<f64> = values
        .iter()
        .map(|&p| {
            if b < 0.0 && p < CSP_FLOOR {
                floored += 1;
                let v = CSP_FLOOR.powf(b);
                floored_mass += v;
                v
            } else {
                p.powf(b)
            }
        })
        .collect();
    let nf = n as f64;
    let mean = pow.iter().sum::<f64>() / nf;
    let var = if n > 1 {
        pow.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0)
    } else {
        f64::NAN
    };
    let total = mean * nf;
    MomentEstimate {
        order: b,
        mean,
        std_error: (var / nf).sqrt(),
        samples: n,
        floored_fraction: floored as f64 / nf,
        unreliable: floored > 0 && floored_mass > 0.1 * total,
    }
}

impl SimRun {
    /// Moment estimates of rank `m`, indexed `[θ index][order index]`.
    pub fn moments(&self, m: usize, orders: &[f64]) -> Result<Vec<Vec<MomentEstimate>>> {
        (0..self.config.theta_grid.len())
            .map(|k| {
                let v = self.table.get(m, k)?;
                if v.is_empty() {
                    return Err(Error::Undefined(format!(
                        "no realization landed on rank {m}"
                    )));
                }
                Ok(orders.iter().map(|&b| moment_of(v, b)).collect())
            })
            .collect()
    }

    /// Empirical `F̄(x) = P(P_s > x)` of rank `m` at threshold index `k`.
    pub fn empirical_meta(&self, m: usize, k: usize, grid: &[f64]) -> Result<MetaCurve<f64>> {
        let mut v = self.table.get(m, k)?.to_vec();
        if v.is_empty() {
            return Err(Error::Undefined(format!(
                "no realization landed on rank {m}"
            )));
        }
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let values = grid
            .iter()
            .map(|&x| {
                let at_or_below = v.partition_point(|p| *p <= x);
                (v.len() - at_or_below) as f64 / n
            })
            .collect();
        Ok(MetaCurve {
            xs: grid.to_vec(),
            values,
            kind: MetaKind::Empirical,
        })
    }
}

/// Runs the simulation and returns moment estimates of rank `m`,
/// `[θ index][order index]`.
pub fn estimate_moments(
    config: &SimConfig,
    orders: &[f64],
    m: usize,
    threads: Option<usize>,
) -> Result<Vec<Vec<MomentEstimate>>> {
    run(config, threads)?.moments(m, orders)
}

/// Runs the simulation and returns the empirical meta distribution.
pub fn empirical_meta(
    config: &SimConfig,
    m: usize,
    theta_index: usize,
    grid: &[f64],
    threads: Option<usize>,
) -> Result<MetaCurve<f64>> {
    run(config, threads)?.empirical_meta(m, theta_index, grid)
}

/// Interferer counts in `b(o, r)` for every radius of `r_grid` (ascending).
fn interferer_counts(
    config: &SimConfig,
    r_grid: &[f64],
    threads: Option<usize>,
) -> Result<Vec<Vec<u32>>> {
    if config.direction != Direction::Uplink {
        return Err(Error::Domain(
            "interferer statistics are defined for the uplink".into(),
        ));
    }
    if r_grid.windows(2).any(|w| w[0] >= w[1]) || r_grid.first().is_some_and(|r| *r < 0.0) {
        return Err(Error::Domain(
            "radius grid must be non-negative and increasing".into(),
        ));
    }
    if r_grid.last().is_some_and(|r| *r > config.window()) {
        return Err(Error::Domain(
            "radius grid extends beyond the window".into(),
        ));
    }
    map_realizations(config, threads, |_, real| {
        let mut d: Vec<f64> = real.interferers.iter().map(|p| norm2(*p)).collect();
        d.sort_by(f64::total_cmp);
        Ok(r_grid
            .iter()
            .map(|r| d.partition_point(|x| *x <= r * r) as u32)
            .collect())
    })
}

/// Pair correlation estimate of the interferer process around the typical
/// BS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PcfEstimate {
    pub r: Vec<f64>,
    /// Mean interferer count in `b(o, r)`.
    pub mean_count: Vec<f64>,
    /// Smoothed `g(r)`.
    pub g: Vec<f64>,
}

/// Half-width (in grid points) of the local polynomial smoother.
const SMOOTH_HALF_WIDTH: usize = 3;

/// `g(r) = (dΛ/d(πr²)) / (Nλ)` from the mean counts, with the derivative
/// taken from a local quadratic fit in area.
pub fn estimate_pcf(
    config: &SimConfig,
    r_grid: &[f64],
    threads: Option<usize>,
) -> Result<PcfEstimate> {
    Ok(estimate_interferer_stats(config, r_grid, threads)?.0)
}

/// Pair correlation and second moment from a single pass.
pub fn estimate_interferer_stats(
    config: &SimConfig,
    r_grid: &[f64],
    threads: Option<usize>,
) -> Result<(PcfEstimate, SecondMomentEstimate)> {
    let counts = interferer_counts(config, r_grid, threads)?;
    Ok((
        pcf_from_counts(config, r_grid, &counts),
        second_from_counts(config, r_grid, &counts),
    ))
}

fn pcf_from_counts(config: &SimConfig, r_grid: &[f64], counts: &[Vec<u32>]) -> PcfEstimate {
    let mean = column_means(counts, r_grid.len(), |c| c as f64);
    let area: Vec<f64> = r_grid
        .iter()
        .map(|r| std::f64::consts::PI * r * r)
        .collect();
    let density = config.params.n_users as f64 * config.params.lambda_b;
    let g = (0..r_grid.len())
        .map(|i| local_slope(&area, &mean, i, SMOOTH_HALF_WIDTH) / density)
        .collect();
    PcfEstimate {
        r: r_grid.to_vec(),
        mean_count: mean,
        g,
    }
}

/// Second moment measure of the interferer counts and `ρ(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SecondMomentEstimate {
    pub r: Vec<f64>,
    pub mean_count: Vec<f64>,
    pub second_moment: Vec<f64>,
    /// `√E[Φ_I(b(o,r))²] / (Nλ)`.
    pub rho: Vec<f64>,
    /// Analytical mean count, for a first-moment cross-check.
    pub model_mean_count: Vec<f64>,
}

pub fn estimate_second_moment(
    config: &SimConfig,
    r_grid: &[f64],
    threads: Option<usize>,
) -> Result<SecondMomentEstimate> {
    Ok(estimate_interferer_stats(config, r_grid, threads)?.1)
}

fn second_from_counts(
    config: &SimConfig,
    r_grid: &[f64],
    counts: &[Vec<u32>],
) -> SecondMomentEstimate {
    let mean = column_means(counts, r_grid.len(), |c| c as f64);
    let second = column_means(counts, r_grid.len(), |c| (c as f64) * (c as f64));
    let norm = config.params.n_users as f64 * config.params.lambda_b;
    SecondMomentEstimate {
        r: r_grid.to_vec(),
        rho: second.iter().map(|s| s.sqrt() / norm).collect(),
        model_mean_count: r_grid
            .iter()
            .map(|&r| model_intensity_measure(r, &config.params))
            .collect(),
        mean_count: mean,
        second_moment: second,
    }
}

fn column_means(rows: &[Vec<u32>], cols: usize, f: impl Fn(u32) -> f64) -> Vec<f64> {
    let mut acc = vec![0.0; cols];
    for row in rows {
        for (a, &c) in acc.iter_mut().zip(row) {
            *a += f(c);
        }
    }
    let n = rows.len() as f64;
    acc.iter().map(|a| a / n).collect()
}

// Least-squares slope of y against x over the points within `h` of `i`.
fn local_slope(x: &[f64], y: &[f64], i: usize, h: usize) -> f64 {
    let lo = i.saturating_sub(h);
    let hi = (i + h + 1).min(x.len());
    if hi - lo < 3 {
        return f64::NAN;
    }
    // Least-squares y ≈ a + b·u + c·u² with u = x − x[i]; the slope at x[i]
    // is b. Exact for quadratics, so the one-sided windows at the grid ends
    // stay unbiased where the count grows like the square of the area.
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for k in lo..hi {
        let u = x[k] - x[i];
        let mut p = 1.0;
        for (j, sj) in s.iter_mut().enumerate() {
            *sj += p;
            if j < 3 {
                t[j] += p * y[k];
            }
            p *= u;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let mut mb = m;
    for r in 0..3 {
        mb[r][1] = t[r];
    }
    det3(mb) / det3(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkParams;

    #[test]
    fn moment_of_basics() {
        let v = [0.5, 0.25, 1.0, 0.0];
        assert_eq!(moment_of(&v, 0.0).mean, 1.0);
        let m1 = moment_of(&v, 1.0);
        assert!((m1.mean - 0.4375).abs() < 1e-15);
        let neg = moment_of(&v, -1.0);
        assert!(neg.floored_fraction == 0.25 && neg.unreliable);
    }

    #[test]
    fn local_slope_is_exact_for_lines() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        for i in 0..10 {
            assert!((local_slope(&x, &y, i, 3) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn local_slope_is_exact_for_quadratics() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v * v - v + 3.0).collect();
        for i in 0..10 {
            assert!((local_slope(&x, &y, i, 3) - (x[i] - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn determinism_across_worker_counts() {
        let cfg = SimConfig {
            params: NetworkParams::new(1.0, 4.0, 2).unwrap(),
            window_radius: Some(6.0),
            realizations: 150,
            seed: 11,
            direction: Direction::Uplink,
            theta_grid: vec![0.3, 1.0],
            betas: None,
        };
        let a = run(&cfg, Some(1)).unwrap();
        let b = run(&cfg, Some(3)).unwrap();
        assert_eq!(a, b);
    }
}
