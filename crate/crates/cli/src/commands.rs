//! One function per subcommand. Each evaluates, writes its tables and ends
//! with the manifest.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use noma_meta::geometry::{pcf_fit, rho};
use noma_meta::metadist::{
    delay_reliability_argument, delay_stats, exact_meta, meta_bounds, BetaShape, GilPelaez,
    LinkSpec,
};
use noma_meta::model::{Classification, Direction, InterfererModel, MomentOrder};
use noma_meta::optimizer::{solve_p1, solve_p2, solve_p3};
use noma_meta::simulator::{self, SimConfig};
use noma_meta::validation::{self, SuiteOptions, CRITERIA};
use noma_meta::{Allocation, Params};
use serde_json::json;

use crate::output::{Cell, OutDir, Table};
use crate::scenario::{Problem, Scenario};

/// Settings shared by every subcommand.
pub struct RunContext {
    pub scenario: Option<Scenario>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl RunContext {
    fn scenario(&self) -> Result<&Scenario> {
        self.scenario
            .as_ref()
            .ok_or_else(|| anyhow!("this command needs --scenario"))
    }

    fn config(&self, extra: serde_json::Value) -> Result<serde_json::Value> {
        let mut cfg = json!({ "scenario": self.scenario });
        if let (Some(obj), serde_json::Value::Object(more)) = (cfg.as_object_mut(), extra) {
            obj.extend(more);
        }
        Ok(cfg)
    }

    fn workers(&self) -> usize {
        self.threads
            .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
            .unwrap_or(1)
            .max(1)
    }
}

/// Order-preserving parallel map over scoped threads.
fn par_map<I, O, F>(items: &[I], workers: usize, f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync,
{
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

fn real_moment(
    link: &LinkSpec<f64>,
    b: f64,
    m: usize,
    p: &Params,
    theta: f64,
) -> Result<(f64, Classification)> {
    let v = link.moment(MomentOrder::Real(b), m, p, theta)?;
    Ok((v.re(), v.classification))
}

/// Beta law for a rank, or `None` when the CSP is a.s. 0 or 1.
fn fitted(m1: f64, m2: f64) -> Result<Option<BetaShape<f64>>> {
    if m1 <= 0.0 || m1 >= 1.0 {
        return Ok(None);
    }
    Ok(Some(BetaShape::fit(m1, m2)?))
}

/// `F̄(x)` of a CSP that is constantly `m1 ∈ {0, 1}`.
fn point_mass_ccdf(m1: f64, x: f64) -> f64 {
    if x < m1 {
        1.0
    } else {
        0.0
    }
}

pub fn moments(ctx: &RunContext) -> Result<PathBuf> {
    let sc = ctx.scenario()?;
    let link = sc.link()?;
    let mut out = OutDir::create(&ctx.out)?;
    let mut table = Table::new(&[
        "theta_db",
        "rank",
        "order_re",
        "order_im",
        "value_re",
        "value_im",
        "classification",
    ]);
    for (db, theta) in sc.thresholds()? {
        for m in sc.ranks() {
            for &b in &sc.orders {
                let v = link
                    .moment(b, m, &sc.params, theta)
                    .with_context(|| format!("M_{b:?} of rank {m} at {db} dB"))?;
                table.row(vec![
                    db.into(),
                    m.into(),
                    b.re().into(),
                    b.im().into(),
                    v.value.re.into(),
                    v.value.im.into(),
                    v.classification.as_str().into(),
                ]);
            }
        }
    }
    out.write_table("moments.csv", &table)?;
    out.finish("moments", None, &ctx.config(json!({}))?)
}

pub fn meta(ctx: &RunContext) -> Result<PathBuf> {
    let sc = ctx.scenario()?;
    let link = sc.link()?;
    let p = sc.params;
    let xs = sc.reliability();
    let opts = GilPelaez::default();
    let mut out = OutDir::create(&ctx.out)?;
    let mut table = Table::new(&["theta_db", "rank", "x", "value", "kind"]);
    let mut summary = Vec::new();
    for (db, theta) in sc.thresholds()? {
        for m in sc.ranks() {
            let raw: Vec<(f64, f64)> = (1..=4)
                .map(|k| Ok((k as f64, real_moment(&link, k as f64, m, &p, theta)?.0)))
                .collect::<Result<_>>()?;
            let (m1, m2) = (raw[0].1, raw[1].1);
            let shape = fitted(m1, m2)?;
            let fit: Vec<f64> = xs
                .iter()
                .map(|&x| match &shape {
                    Some(s) => Ok(s.ccdf(x)?),
                    None => Ok(point_mass_ccdf(m1, x)),
                })
                .collect::<Result<_>>()?;
            let exact: Option<Vec<f64>> = if sc.skip_exact {
                None
            } else if shape.is_none() {
                Some(fit.clone())
            } else {
                let vals = par_map(&xs, ctx.workers(), |&x| {
                    exact_meta(link.imaginary_moments(m, &p, theta), x, &opts).map(|e| e.value)
                });
                Some(vals.into_iter().collect::<Result<_, _>>()?)
            };
            let mut worst_bound_gap = 0.0f64;
            for (i, &x) in xs.iter().enumerate() {
                let bounds = meta_bounds(&raw, x)?;
                table.row(vec![
                    db.into(),
                    m.into(),
                    x.into(),
                    fit[i].into(),
                    "betaFit".into(),
                ]);
                if let Some(e) = &exact {
                    table.row(vec![
                        db.into(),
                        m.into(),
                        x.into(),
                        e[i].into(),
                        "exact".into(),
                    ]);
                    worst_bound_gap = worst_bound_gap
                        .max(bounds.lower - e[i])
                        .max(e[i] - bounds.upper);
                }
                table.row(vec![
                    db.into(),
                    m.into(),
                    x.into(),
                    bounds.lower.into(),
                    "lowerBound".into(),
                ]);
                table.row(vec![
                    db.into(),
                    m.into(),
                    x.into(),
                    bounds.upper.into(),
                    "upperBound".into(),
                ]);
            }
            let sup = exact.as_ref().map(|e| {
                e.iter()
                    .zip(&fit)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            });
            summary.push(json!({
                "thetaDb": db,
                "rank": m,
                "m1": m1,
                "m2": m2,
                "betaShape": shape,
                "supExactVsFit": sup,
                "boundViolation": exact.as_ref().map(|_| worst_bound_gap.max(0.0)),
            }));
        }
    }
    out.write_table("meta.csv", &table)?;
    out.write_json("meta_summary.json", &summary)?;
    out.finish("meta", None, &ctx.config(json!({}))?)
}

pub fn delay(ctx: &RunContext) -> Result<PathBuf> {
    let sc = ctx.scenario()?;
    let link = sc.link()?;
    let p = sc.params;
    let mut out = OutDir::create(&ctx.out)?;
    let mut stats = Table::new(&[
        "theta_db",
        "rank",
        "m_minus1",
        "m_minus2",
        "classification",
        "mean",
        "variance",
    ]);
    let mut transform = Table::new(&[
        "theta_db",
        "rank",
        "attempts",
        "reliability",
        "argument",
        "fraction",
        "kind",
    ]);
    let opts = GilPelaez::default();
    for (db, theta) in sc.thresholds()? {
        for m in sc.ranks() {
            let (d1, class) = real_moment(&link, -1.0, m, &p, theta)?;
            let (d2, _) = real_moment(&link, -2.0, m, &p, theta)?;
            let s = delay_stats(d1, d2)?;
            stats.row(vec![
                db.into(),
                m.into(),
                d1.into(),
                d2.into(),
                class.as_str().into(),
                s.mean.into(),
                s.variance.into(),
            ]);
            let Some(block) = &sc.delay else { continue };
            let (m1, _) = real_moment(&link, 1.0, m, &p, theta)?;
            let (m2, _) = real_moment(&link, 2.0, m, &p, theta)?;
            let shape = fitted(m1, m2)?;
            for &k in &block.attempts {
                for &x in &block.reliability {
                    let arg = delay_reliability_argument(k, x)?;
                    let fit = match &shape {
                        Some(s) => s.ccdf(arg)?,
                        None => point_mass_ccdf(m1, arg),
                    };
                    transform.row(vec![
                        db.into(),
                        m.into(),
                        k.into(),
                        x.into(),
                        arg.into(),
                        fit.into(),
                        "betaFit".into(),
                    ]);
                    if !sc.skip_exact && shape.is_some() {
                        let e = exact_meta(link.imaginary_moments(m, &p, theta), arg, &opts)?.value;
                        transform.row(vec![
                            db.into(),
                            m.into(),
                            k.into(),
                            x.into(),
                            arg.into(),
                            e.into(),
                            "exact".into(),
                        ]);
                    }
                }
            }
        }
    }
    out.write_table("delay.csv", &stats)?;
    if sc.delay.is_some() {
        out.write_table("delay_reliability.csv", &transform)?;
    }
    out.finish("delay", None, &ctx.config(json!({}))?)
}

pub fn simulate(ctx: &RunContext) -> Result<PathBuf> {
    let sc = ctx.scenario()?;
    let block = sc
        .simulation
        .as_ref()
        .ok_or_else(|| anyhow!("scenario has no \"simulation\" block"))?;
    let seed = ctx.seed.unwrap_or(block.seed);
    let thresholds = sc.thresholds()?;
    let config = SimConfig {
        params: sc.params,
        window_radius: block.window_radius,
        realizations: block.realizations,
        seed,
        direction: sc.direction,
        theta_grid: thresholds.iter().map(|t| t.1).collect(),
        betas: sc.betas.clone(),
    };
    config.validate()?;
    let orders: Vec<f64> = sc
        .orders
        .iter()
        .filter_map(|b| match b {
            MomentOrder::Real(v) => Some(*v),
            MomentOrder::Imaginary(_) => None,
        })
        .collect();
    if orders.len() < sc.orders.len() {
        eprintln!("note: imaginary orders are not estimated by the simulator");
    }
    let link = sc.link().ok();
    let run = simulator::run(&config, ctx.threads)?;
    let xs = sc.reliability();
    let mut out = OutDir::create(&ctx.out)?;
    let mut mom = Table::new(&[
        "theta_db",
        "rank",
        "order",
        "mean",
        "std_error",
        "samples",
        "floored_fraction",
        "unreliable",
        "analytic",
    ]);
    let mut meta = Table::new(&["theta_db", "rank", "x", "value"]);
    let mut samples = Table::new(&["theta_db", "rank", "index", "csp"]);
    for m in sc.ranks() {
        let est = match run.moments(m, &orders) {
            Ok(e) => e,
            Err(e) => {
                eprintln!("note: rank {m} skipped: {e}");
                continue;
            }
        };
        for (k, &(db, theta)) in thresholds.iter().enumerate() {
            for e in &est[k] {
                let analytic = match &link {
                    Some(l) => real_moment(l, e.order, m, &sc.params, theta)?.0,
                    None => f64::NAN,
                };
                mom.row(vec![
                    db.into(),
                    m.into(),
                    e.order.into(),
                    e.mean.into(),
                    e.std_error.into(),
                    e.samples.into(),
                    e.floored_fraction.into(),
                    e.unreliable.into(),
                    analytic.into(),
                ]);
            }
            let curve = run.empirical_meta(m, k, &xs)?;
            for (x, v) in curve.xs.iter().zip(&curve.values) {
                meta.row(vec![db.into(), m.into(), (*x).into(), (*v).into()]);
            }
            if block.per_realization {
                for (i, v) in run.table.get(m, k)?.iter().enumerate() {
                    samples.row(vec![db.into(), m.into(), i.into(), (*v).into()]);
                }
            }
        }
    }
    out.write_table("sim_moments.csv", &mom)?;
    out.write_table("sim_meta.csv", &meta)?;
    if block.per_realization {
        out.write_table("csp_samples.csv", &samples)?;
    }
    if let Some(r_grid) = &block.r_grid {
        if sc.direction != Direction::Uplink {
            bail!("\"rGrid\" applies to uplink scenarios only");
        }
        let (pcf, second) = simulator::estimate_interferer_stats(&config, r_grid, ctx.threads)?;
        let mut t = Table::new(&[
            "r",
            "mean_count",
            "g",
            "g_fit",
            "second_moment",
            "rho",
            "rho_model1",
            "rho_model2",
        ]);
        for (i, &r) in r_grid.iter().enumerate() {
            t.row(vec![
                r.into(),
                pcf.mean_count[i].into(),
                pcf.g[i].into(),
                pcf_fit(r, &sc.params).into(),
                second.second_moment[i].into(),
                second.rho[i].into(),
                rho(r, &sc.params, InterfererModel::Model1).into(),
                rho(r, &sc.params, InterfererModel::Model2).into(),
            ]);
        }
        out.write_table("interferers.csv", &t)?;
    }
    out.write_json(
        "summary.json",
        &json!({
            "realizations": config.realizations,
            "seed": seed,
            "windowRadius": config.window(),
            "samplesPerRank": sc.ranks().iter().map(|&m| {
                run.table.samples.get(m - 1).and_then(|r| r.first()).map_or(0, Vec::len)
            }).collect::<Vec<_>>(),
        }),
    )?;
    out.finish(
        "simulate",
        Some(seed),
        &ctx.config(json!({ "seed": seed }))?,
    )
}

pub fn optimize(ctx: &RunContext) -> Result<PathBuf> {
    let sc = ctx.scenario()?;
    let block = sc
        .optimization
        .as_ref()
        .ok_or_else(|| anyhow!("scenario has no \"optimization\" block"))?;
    let p = sc.params;
    let n = p.n_users;
    let mut results: Vec<(f64, Allocation)> = Vec::new();
    for (db, theta) in sc.thresholds()? {
        let r = match block.problem {
            Problem::P1 | Problem::P2 => {
                let target = block
                    .target
                    .ok_or_else(|| anyhow!("{:?} needs \"target\"", block.problem))?;
                if block.problem == Problem::P1 {
                    solve_p1(theta, target, &p)?
                } else {
                    solve_p2(theta, target, &p)?
                }
            }
            Problem::P3 => {
                let targets = block
                    .targets
                    .as_ref()
                    .ok_or_else(|| anyhow!("p3 needs \"targets\""))?;
                solve_p3(theta, targets, &p)?
            }
        };
        results.push((db, r));
    }
    let mut header = vec!["theta_db".to_owned(), "feasible".to_owned()];
    header.extend((1..=n).map(|k| format!("beta_{k}")));
    header.extend((1..=n).map(|k| format!("success_{k}")));
    header.push("binding".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header);
    for (db, r) in &results {
        let mut row: Vec<Cell> = vec![(*db).into(), r.feasible.into()];
        row.extend(r.betas_or_zeros(n).into_iter().map(Cell::from));
        row.extend((0..n).map(|k| Cell::from(r.achieved.get(k).copied().unwrap_or(0.0))));
        row.push(Cell::Text(r.binding.join(";")));
        table.row(row);
    }
    let mut out = OutDir::create(&ctx.out)?;
    out.write_table("optimize.csv", &table)?;
    let doc: Vec<_> = results
        .iter()
        .map(|(db, r)| json!({ "thetaDb": db, "result": r }))
        .collect();
    out.write_json("optimize.json", &doc)?;
    out.finish("optimize", None, &ctx.config(json!({}))?)
}

/// Runs the acceptance checks; returns whether all of them passed.
pub fn validate(ctx: &RunContext, checks: &[u32]) -> Result<(PathBuf, bool)> {
    let mut opts = SuiteOptions {
        threads: ctx.threads,
        ..SuiteOptions::default()
    };
    if let Some(s) = ctx.seed {
        opts.seed = s;
    }
    let ids: Vec<u32> = if checks.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        checks.to_vec()
    };
    if let Some(bad) = ids.iter().find(|i| !CRITERIA.iter().any(|c| c.0 == **i)) {
        bail!("no check numbered {bad}");
    }
    let mut text = String::new();
    let mut all = true;
    for id in &ids {
        let report = validation::run_criterion(*id, &opts);
        println!("{report}");
        all &= report.passed;
        text.push_str(&format!("{report}\n"));
    }
    let mut out = OutDir::create(&ctx.out)?;
    out.write_text("validate.txt", &text)?;
    let dir = out.finish(
        "validate",
        Some(opts.seed),
        &json!({ "checks": ids, "seed": opts.seed }),
    )?;
    Ok((dir, all))
}
