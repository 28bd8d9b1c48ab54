//! Scenario files: the JSON a user writes to describe one study.
//!
//! Thresholds are given in dB here and converted to linear scale once, in
//! [`Scenario::thresholds`]; nothing below the CLI ever sees dB.

use anyhow::{bail, Context, Result};
use noma_meta::metadist::LinkSpec;
use noma_meta::model::{Direction, InterfererModel, MomentOrder};
use noma_meta::optimizer::OptTargets;
use noma_meta::{db_to_linear, Betas, Params};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Scenario {
    pub direction: Direction,
    pub params: Params,
    /// Downlink power fractions, weakest rank first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Betas>,
    /// Uplink interferer approximation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferer_model: Option<InterfererModel>,
    /// SIR thresholds in dB.
    #[serde(default)]
    pub theta_db: Vec<f64>,
    /// Moment orders, e.g. `{"real": 1}` or `{"imaginary": 2.5}`.
    #[serde(default = "default_orders")]
    pub orders: Vec<MomentOrder<f64>>,
    /// Ranks to report; all ranks when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    /// Reliability levels `x` at which meta distributions are evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability_grid: Option<Vec<f64>>,
    /// Skip the (slow) exact inversion and report only fit and bounds.
    #[serde(default)]
    pub skip_exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<DelayBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationBlock>,
    /// Output directory used when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_orders() -> Vec<MomentOrder<f64>> {
    vec![MomentOrder::Real(1.0), MomentOrder::Real(2.0)]
}

/// Delay–reliability queries: fraction of users that succeed within `k`
/// attempts with probability at least `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DelayBlock {
    pub attempts: Vec<u32>,
    pub reliability: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SimulationBlock {
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<f64>,
    /// Also write every sampled CSP.
    #[serde(default)]
    pub per_realization: bool,
    /// Radii for the interferer pair-correlation and second-moment tables
    /// (uplink only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Two users: maximize the stronger rank subject to a target on the
    /// weaker one.
    P1,
    /// As `P1`, plus finite mean local delay for both ranks.
    P2,
    /// General `N`: linear program over the allocation.
    P3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OptimizationBlock {
    pub problem: Problem,
    /// Success target of rank 1 (`p1`, `p2`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Targets of the general problem (`p3`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<OptTargets<f64>>,
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let s: Scenario =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        self.params.validate()?;
        if let Some(b) = &self.betas {
            if b.len() != self.params.n_users {
                bail!(
                    "{} power fractions for N = {}",
                    b.len(),
                    self.params.n_users
                );
            }
        }
        for &m in self.ranks.iter().flatten() {
            if m == 0 || m > self.params.n_users {
                bail!("rank {m} outside 1..={}", self.params.n_users);
            }
        }
        if let Some(grid) = &self.reliability_grid {
            if grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
                bail!("reliability levels must lie in [0, 1]");
            }
        }
        if self.theta_db.iter().any(|t| !t.is_finite()) {
            bail!("thresholds must be finite");
        }
        Ok(())
    }

    /// The link the analytical commands evaluate.
    pub fn link(&self) -> Result<LinkSpec<f64>> {
        match self.direction {
            Direction::Downlink => match &self.betas {
                Some(b) => Ok(LinkSpec::Downlink(b.clone())),
                None => bail!("downlink scenarios need \"betas\""),
            },
            Direction::Uplink => match self.interferer_model {
                Some(m) => Ok(LinkSpec::Uplink(m)),
                None => bail!("uplink scenarios need \"interfererModel\""),
            },
        }
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.ranks
            .clone()
            .unwrap_or_else(|| (1..=self.params.n_users).collect())
    }

    /// `(dB, linear)` threshold pairs.
    pub fn thresholds(&self) -> Result<Vec<(f64, f64)>> {
        if self.theta_db.is_empty() {
            bail!("no thresholds: set \"thetaDb\" or pass --grid");
        }
        Ok(self
            .theta_db
            .iter()
            .map(|&d| (d, db_to_linear(d)))
            .collect())
    }

    pub fn reliability(&self) -> Vec<f64> {
        self.reliability_grid
            .clone()
            .unwrap_or_else(|| (0..=20).map(|i| i as f64 * 0.05).collect())
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad grid '{spec}'"))?;
        let [start, stop, step] = parts[..] else {
            bail!("grid ranges are start:stop:step, got '{spec}'");
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("grid '{spec}' needs step > 0 and stop >= start");
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            bail!("grid '{spec}' has too many points");
        }
        // Round away representation noise so dB labels print cleanly.
        Ok((0..=n)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect())
    } else {
        spec.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad grid value '{p}'"))
            })
            .collect()
    }
}
