//! Monte Carlo reference for the analytical models.
//!
//! Each realization draws a Poisson BS layout in a disc, builds the needed
//! Voronoi cells and places users uniformly in them. Rayleigh fading is
//! averaged out exactly, so a realization yields the conditional success
//! probability (CSP) itself rather than a coin flip.
//!
//! Realization `i` draws from its own ChaCha8 stream (`seed`, stream `i`),
//! and all reductions run over fixed index order, so results are
//! bit-identical for any worker count.

mod csp;
mod estimate;
pub mod voronoi;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Direction, NetworkParams, PowerAllocation};

pub use csp::{csp_downlink, csp_uplink, tail_log_factor};
pub use estimate::{
    empirical_meta, estimate_interferer_stats, estimate_moments, estimate_pcf,
    estimate_second_moment, run, CspTable, MomentEstimate, PcfEstimate, SecondMomentEstimate,
    SimRun, CSP_FLOOR,
};
use voronoi::{bounding_box, contains, norm2, BucketGrid, Point};

/// Expected number of BSs in an automatically sized window.
pub const MIN_EXPECTED_BS: f64 = 500.0;

/// Guard ring (in mean BS spacings) simulated beyond the uplink window so
/// that cells straddling the window edge are built from complete
/// neighbourhoods.
const GUARD_SPACINGS: f64 = 4.0;

const REJECTION_CAP: usize = 1 << 20;

/// Simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SimConfig {
    pub params: NetworkParams<f64>,
    /// Observation disc radius; `None` picks the radius holding
    /// [`MIN_EXPECTED_BS`] BSs on average.
    #[serde(default)]
    pub window_radius: Option<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub direction: Direction,
    /// Linear SIR thresholds.
    pub theta_grid: Vec<f64>,
    /// Downlink power fractions.
    #[serde(default)]
    pub betas: Option<PowerAllocation<f64>>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.realizations == 0 {
            return Err(Error::Domain("at least one realization is required".into()));
        }
        let w = self.window();
        let min = 5.0 / (self.params.lambda_b * std::f64::consts::PI).sqrt();
        if !(w > min) || !w.is_finite() {
            return Err(Error::Domain(format!(
                "window radius {w} must exceed {min}"
            )));
        }
        if self
            .theta_grid
            .iter()
            .any(|t| !(*t >= 0.0) || !t.is_finite())
        {
            return Err(Error::Domain(
                "thresholds must be finite and non-negative".into(),
            ));
        }
        if self.direction == Direction::Downlink {
            match &self.betas {
                Some(b) if b.len() == self.params.n_users => {}
                Some(b) => {
                    return Err(Error::Domain(format!(
                        "{} power fractions for a cluster of {}",
                        b.len(),
                        self.params.n_users
                    )))
                }
                None => {
                    return Err(Error::Domain(
                        "downlink simulation needs power fractions".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    /// Effective window radius.
    pub fn window(&self) -> f64 {
        self.window_radius.unwrap_or_else(|| {
            (MIN_EXPECTED_BS / (std::f64::consts::PI * self.params.lambda_b)).sqrt()
        })
    }
}

/// Geometry seen by the typical link.
#[derive(Debug, Clone, PartialEq)]
pub enum TypicalLink {
    /// Distances of the typical cell's users to its BS, ascending (rank order).
    Uplink { user_distances: Vec<f64> },
    /// Serving distance of the typical user and its rank among the cell's
    /// users.
    Downlink { serving_distance: f64, rank: usize },
}

/// One network snapshot, centred on the typical BS (uplink) or the typical
/// user (downlink).
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub bs_points: Vec<Point>,
    pub typical: TypicalLink,
    /// Uplink: users of other cells; downlink: non-serving BSs. Only points
    /// inside the window are kept.
    pub interferers: Vec<Point>,
    pub alpha: f64,
    pub window_radius: f64,
    /// Density used for the analytic correction beyond the window; zero
    /// disables it.
    pub tail_density: f64,
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn uniform_in_disc(rng: &mut ChaCha8Rng, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    [r * phi.cos(), r * phi.sin()]
}

fn poisson_disc(rng: &mut ChaCha8Rng, lambda: f64, radius: f64) -> Result<usize> {
    let mean = lambda * std::f64::consts::PI * radius * radius;
    let dist =
        Poisson::new(mean).map_err(|e| Error::Domain(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

fn uniform_in_cell(rng: &mut ChaCha8Rng, poly: &[Point]) -> Result<Point> {
    let (lo, hi) = bounding_box(poly);
    for _ in 0..REJECTION_CAP {
        let p = [
            lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(),
            lo[1] + (hi[1] - lo[1]) * rng.random::<f64>(),
        ];
        if contains(poly, p) {
            return Ok(p);
        }
    }
    Err(Error::Undefined(
        "rejection sampling in a degenerate cell".into(),
    ))
}

fn typical_cell_distances(rng: &mut ChaCha8Rng, poly: &[Point], n: usize) -> Result<Vec<f64>> {
    let mut d = (0..n)
        .map(|_| uniform_in_cell(rng, poly).map(|p| norm2(p).sqrt()))
        .collect::<Result<Vec<_>>>()?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Draws realization `index` of `config`.
pub fn sample_realization(config: &SimConfig, index: usize) -> Result<Realization> {
    sample(config, index, true)
}

/// Typical-cell user distances of realization `index` (uplink), without
/// building the rest of the network. Same stream as
/// [`sample_realization`].
pub fn sample_typical_distances(config: &SimConfig, index: usize) -> Result<Vec<f64>> {
    match sample(config, index, false)?.typical {
        TypicalLink::Uplink { user_distances } => Ok(user_distances),
        TypicalLink::Downlink { .. } => Err(Error::Domain(
            "typical-cell distances are an uplink quantity".into(),
        )),
    }
}

fn sample(config: &SimConfig, index: usize, full: bool) -> Result<Realization> {
    let lambda = config.params.lambda_b;
    let n = config.params.n_users;
    let w = config.window();
    let spacing = lambda.sqrt().recip();
    let mut rng = stream(config.seed, index);
    match config.direction {
        Direction::Uplink => {
            let outer = w + GUARD_SPACINGS * spacing;
            let count = poisson_disc(&mut rng, lambda, outer)?;
            let mut bs = Vec::with_capacity(count + 1);
            bs.push([0.0, 0.0]);
            bs.extend((0..count).map(|_| uniform_in_disc(&mut rng, outer)));
            let grid = BucketGrid::new(&bs, outer, spacing);
            let typical = grid.cell_polygon(&bs, 0, outer);
            let user_distances = typical_cell_distances(&mut rng, &typical, n)?;
            let mut interferers = Vec::new();
            if full {
                let reach = w + 0.5 * GUARD_SPACINGS * spacing;
                let reach2 = reach * reach;
                let w2 = w * w;
                for j in 1..bs.len() {
                    if norm2(bs[j]) > reach2 {
                        continue;
                    }
                    let cell = grid.cell_polygon(&bs, j, outer);
                    for _ in 0..n {
                        let u = uniform_in_cell(&mut rng, &cell)?;
                        if norm2(u) <= w2 {
                            interferers.push(u);
                        }
                    }
                }
            }
            Ok(Realization {
                bs_points: bs,
                typical: TypicalLink::Uplink { user_distances },
                interferers,
                alpha: config.params.alpha,
                window_radius: w,
                tail_density: n as f64 * lambda,
            })
        }
        Direction::Downlink => {
            let count = poisson_disc(&mut rng, lambda, w)?;
            let bs: Vec<Point> = (0..count).map(|_| uniform_in_disc(&mut rng, w)).collect();
            let serving = (0..bs.len())
                .min_by(|&a, &b| norm2(bs[a]).total_cmp(&norm2(bs[b])))
                .ok_or_else(|| Error::Undefined("no BS in the window".into()))?;
            let grid = BucketGrid::new(&bs, w, spacing);
            // Cell of the serving BS, in coordinates centred on that BS.
            let s = bs[serving];
            let cell: Vec<Point> = grid
                .cell_polygon(&bs, serving, w)
                .into_iter()
                .map(|p| [p[0] - s[0], p[1] - s[1]])
                .collect();
            let r0 = norm2(s).sqrt();
            let mut rank = 1;
            for _ in 1..n {
                let p = uniform_in_cell(&mut rng, &cell)?;
                if norm2(p).sqrt() < r0 {
                    rank += 1;
                }
            }
            let interferers = bs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != serving)
                .map(|(_, p)| *p)
                .collect();
            Ok(Realization {
                bs_points: bs,
                typical: TypicalLink::Downlink {
                    serving_distance: r0,
                    rank,
                },
                interferers,
                alpha: config.params.alpha,
                window_radius: w,
                tail_density: lambda,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(super) fn uplink_config(lambda: f64, n: usize, realizations: usize) -> SimConfig {
        SimConfig {
            params: NetworkParams::new(lambda, 4.0, n).unwrap(),
            window_radius: None,
            realizations,
            seed: 7,
            direction: Direction::Uplink,
            theta_grid: vec![0.1, 1.0],
            betas: None,
        }
    }

    #[test]
    fn window_sizing_and_validation() {
        let c = uplink_config(1e-3, 3, 10);
        assert!((std::f64::consts::PI * 1e-3 * c.window().powi(2) - MIN_EXPECTED_BS).abs() < 1e-9);
        c.validate().unwrap();
        let mut bad = c.clone();
        bad.window_radius = Some(10.0);
        assert!(bad.validate().is_err());
        let mut dl = c.clone();
        dl.direction = Direction::Downlink;
        assert!(dl.validate().is_err());
    }

    #[test]
    fn bs_count_within_poisson_band() {
        let c = uplink_config(1.0, 2, 1);
        let expected = std::f64::consts::PI * (c.window() + GUARD_SPACINGS).powi(2);
        let counts: Vec<f64> = (0..20)
            .map(|i| (sample_realization(&c, i).unwrap().bs_points.len() - 1) as f64)
            .collect();
        let outside = counts
            .iter()
            .filter(|n| (*n - expected).abs() > 3.0 * expected.sqrt())
            .count();
        assert!(outside <= 1, "{counts:?}");
        let mean = counts.iter().sum::<f64>() / 20.0;
        assert!(
            (mean - expected).abs() <= 3.0 * (expected / 20.0).sqrt(),
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn realizations_are_reproducible_and_distinct() {
        let c = uplink_config(1.0, 2, 1);
        let a = sample_realization(&c, 3).unwrap();
        let b = sample_realization(&c, 3).unwrap();
        let d = sample_realization(&c, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.bs_points, d.bs_points);
        assert_eq!(
            sample_typical_distances(&c, 3).unwrap(),
            match a.typical {
                TypicalLink::Uplink { user_distances } => user_distances,
                _ => unreachable!(),
            }
        );
    }

    #[test]
    fn interferers_exclude_typical_cell() {
        let c = uplink_config(1.0, 3, 1);
        let r = sample_realization(&c, 0).unwrap();
        let grid = BucketGrid::new(&r.bs_points, c.window() + GUARD_SPACINGS, 1.0);
        let typical = grid.cell_polygon(&r.bs_points, 0, c.window() + GUARD_SPACINGS);
        assert!(r.interferers.iter().all(|p| !contains(&typical, *p)));
        assert!(r
            .interferers
            .iter()
            .all(|p| norm2(*p) <= c.window().powi(2)));
        match r.typical {
            TypicalLink::Uplink { user_distances } => {
                assert_eq!(user_distances.len(), 3);
                assert!(user_distances.windows(2).all(|w| w[0] <= w[1]));
            }
            _ => unreachable!(),
        }
    }
}
