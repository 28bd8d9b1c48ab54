//! `noma-meta`: moments, meta distributions, delay statistics, Monte Carlo
//! and power allocation for NOMA cellular networks from a JSON scenario.

mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::RunContext;
use scenario::{parse_grid, Scenario};

#[derive(Parser)]
#[command(name = "noma-meta", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory (default: the scenario's "outputDir", else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; overrides the scenario's simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "NOMA_META_THREADS")]
    threads: Option<usize>,
    /// SIR thresholds in dB: "start:stop:step" or "a,b,c". Replaces "thetaDb".
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Moments M_b of the conditional success probability.
    Moments,
    /// Meta distribution: exact inversion, beta fit and moment bounds.
    Meta,
    /// Mean local delay, its variance and the delay-reliability transform.
    Delay,
    /// Monte Carlo estimates on the scenario's threshold grid.
    Simulate,
    /// Power allocation on the scenario's threshold grid.
    Optimize,
    /// Runs the acceptance checks and exits non-zero if any fails.
    Validate {
        /// Comma-separated check numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Vec<u32>,
    },
}

fn context(common: &Common, needs_scenario: bool) -> Result<RunContext> {
    let mut scenario = match &common.scenario {
        Some(path) => Some(Scenario::load(path)?),
        None if needs_scenario => anyhow::bail!("--scenario <path> is required"),
        None => None,
    };
    if let (Some(sc), Some(grid)) = (scenario.as_mut(), &common.grid) {
        sc.theta_db = parse_grid(grid)?;
    }
    if common.threads == Some(0) {
        anyhow::bail!("--threads must be at least 1");
    }
    let out = common
        .out
        .clone()
        .or_else(|| {
            scenario
                .as_ref()
                .and_then(|s| s.output_dir.clone())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(RunContext {
        scenario,
        out,
        seed: common.seed,
        threads: common.threads,
    })
}

fn run(cli: Cli) -> Result<bool> {
    let needs_scenario = !matches!(cli.command, Command::Validate { .. });
    let ctx = context(&cli.common, needs_scenario)?;
    let (dir, ok) = match &cli.command {
        Command::Moments => (commands::moments(&ctx)?, true),
        Command::Meta => (commands::meta(&ctx)?, true),
        Command::Delay => (commands::delay(&ctx)?, true),
        Command::Simulate => (commands::simulate(&ctx)?, true),
        Command::Optimize => (commands::optimize(&ctx)?, true),
        Command::Validate { checks } => commands::validate(&ctx, checks)?,
    };
    eprintln!("wrote {}", dir.display());
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
