//! Command-line front end for `periodlab`.
//!
//! Subcommands read a family configuration, run one scan and write its
//! tables as CSV plus a `report.json` into `--out`. The exit code is 0 when
//! every verdict passes, 1 when one fails, 2 on configuration errors and 3
//! when the numerics give up.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::commands::Options;
use crate::config::FamilyConfig;
use crate::report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric abort: {0}")]
    Numeric(periodlab::Error),
}

impl From<periodlab::Error> for CliError {
    fn from(e: periodlab::Error) -> Self {
        match e {
            periodlab::Error::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Numeric(other),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "periodlab", version, about = "Period matrices and special Kähler metrics of degenerating hyperelliptic curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Family configuration (TOML, or JSON by extension)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV tables and report.json
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative quadrature tolerance, overriding the config
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for row evaluation
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of the randomized checks under `check`
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Period matrix and coordinates at the base point
    Periods,
    /// Ladder scan towards the stratum
    Degenerate,
    /// Loop around the stratum and integer shifts
    Monodromy,
    /// Metric along the line l * Q
    Radial,
    /// Kähler potential and gradient along the ladder
    Potential,
    /// Invariant suite over the bundled configurations
    Check,
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("flag `--threads`: {e}")))?;
    }
    let opts = Options {
        tol: cli.tol,
        seed: cli.seed,
    };
    if let Command::Check = cli.command {
        return commands::check(&opts);
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("flag `--config` is required".into()))?;
    let cfg = FamilyConfig::from_path(path)?;
    match cli.command {
        Command::Periods => commands::periods(&cfg, &opts),
        Command::Degenerate => commands::degenerate(&cfg, &opts),
        Command::Monodromy => commands::monodromy_cmd(&cfg, &opts),
        Command::Radial => commands::radial(&cfg, &opts),
        Command::Potential => commands::potential_cmd(&cfg, &opts),
        Command::Check => unreachable!(),
    }
}

/// Parses `argv`, runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let t0 = Instant::now();
    let mut report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("periodlab: {e}");
            return match e {
                CliError::Config(_) => EXIT_CONFIG,
                CliError::Numeric(_) => EXIT_NUMERIC,
            };
        }
    };
    report.wall_clock_seconds = t0.elapsed().as_secs_f64();
    for v in &report.verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    if let Some(dir) = &cli.out {
        if let Err(e) = report.write(dir) {
            eprintln!("periodlab: {e}");
            return EXIT_CONFIG;
        }
    }
    if !report.aborted.is_empty() {
        for a in &report.aborted {
            eprintln!("periodlab: aborted row {a}");
        }
        return EXIT_NUMERIC;
    }
    let failures = report.failures();
    if failures.is_empty() {
        EXIT_OK
    } else {
        for v in failures {
            eprintln!("periodlab: invariant `{}` failed: {}", v.name, v.detail);
        }
        EXIT_ASSERTION
    }
}
