//! `ssrdc`: batch front end for dominant-pole analysis, damping-controller
//! tuning and time-domain verification.

mod commands;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use ssrdc_core::Config;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "ssrdc", version, about = "Sub/super-synchronous oscillation analysis and damping-controller tuning for PMSG wind farms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration; every section and field is optional.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for randomized inputs.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Simulation step, s.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Estimator reporting delay, s.
    #[arg(long, global = true)]
    te: Option<f64>,
    /// Dominant-pole search band, Hz.
    #[arg(long, global = true, value_name = "LO:HI", value_parser = parse_band)]
    band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Closed-loop poles, dominant pole and RHP count of the configured case.
    Analyze,
    /// Dominant-pole sensitivities and [0.5, 1.5] pu sweeps of eight parameters.
    Sensitivity {
        /// Relative perturbation for the central differences.
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        /// Sweep points over [0.5, 1.5] pu.
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Damping gain for the worst condition of the configured case.
    Tune,
    /// Time-domain run of the configured scenario or a built-in one.
    Simulate {
        /// Built-in scenario (s1, s2_n8, ..., s6) instead of the configured one.
        #[arg(long)]
        scenario: Option<String>,
        /// Run without the damping controller.
        #[arg(long)]
        no_ssrdc: bool,
    },
    /// All built-in scenarios with and without the damping controller.
    Suite,
    /// Estimator accuracy, latency and reset over a grid of synthetic tones.
    SsfeBench,
    /// The four reference condition sweeps.
    Tables {
        /// Also refine the converter constants against the sweeps.
        #[arg(long)]
        calibrate: bool,
    },
}

fn parse_band(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad HI: {e}"))?;
    if !(lo >= 0.0 && hi > lo) {
        return Err(format!("need 0 <= LO < HI, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// Reads a configuration, naming the offending field and position on error.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let cfg: Config = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| anyhow!("{}: at `{}`: {}", path.display(), e.path(), e.inner()))?;
    de.end().map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(cfg)
}

fn effective_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => Config::default(),
    };
    if let Some(dt) = cli.dt {
        cfg.scenario.dt = dt;
    }
    if let Some(te) = cli.te {
        cfg.ssrdc.t_e = te;
    }
    if let Some(b) = cli.band {
        cfg.ssrdc.band = b;
    }
    if let Err(e) = cfg.validate() {
        bail!("invalid configuration: {e}");
    }
    Ok(cfg)
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    NotStabilizable = 2,
    Aborted = 3,
}

fn run(cli: &Cli) -> Result<Status> {
    let cfg = effective_config(cli)?;
    let mut out = output::Output::new(&cli.out, &cli.command, &cfg)?;
    let status = commands::dispatch(&cli.command, &cfg, cli.seed, &mut out)?;
    out.finish()?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(s) => ExitCode::from(s as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
