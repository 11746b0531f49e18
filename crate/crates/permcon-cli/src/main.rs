//! `permcon` command line: seeded concentration experiments with
//! plot-ready CSV/JSON output.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 hypothesis violation,
//! 4 internal failure. Data goes to stdout unless `--out` is given;
//! diagnostics go to stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::{OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "permcon",
    version,
    about = "Concentration bounds for random-permutation statistics: evaluation, exact oracles and Monte Carlo stress tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration document; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo replicates (default 100000).
    #[arg(long, global = true)]
    reps: Option<usize>,

    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format (default json).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Monte Carlo mean and standard error of a statistic.
    Estimate,
    /// Empirical tail curve with exact-binomial upper confidence band.
    Tail,
    /// Evaluate closed-form tail bounds on a grid.
    Bounds,
    /// Full comparison: estimates, tail, bounds, domination verdicts.
    Compare,
    /// Exact small-n distribution (and optional entropy-inequality check).
    Oracle,
    /// Build the adversarial instance and report its analytics.
    Scenario,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Tail => "tail",
            Command::Bounds => "bounds",
            Command::Compare => "compare",
            Command::Oracle => "oracle",
            Command::Scenario => "scenario",
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::Usage)?,
        None => RunConfig::default(),
    };
    if let Some(cmd) = &cfg.command {
        if cmd != cli.command.name() {
            eprintln!(
                "note: config names command '{cmd}', running '{}' from the command line",
                cli.command.name()
            );
        }
    }
    cfg.command = Some(cli.command.name().to_string());
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.reps.is_some() {
        cfg.reps = cli.reps;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    let rendered = match cli.command {
        Command::Estimate => commands::run_estimate(&cfg),
        Command::Tail => commands::run_tail(&cfg),
        Command::Bounds => commands::run_bounds(&cfg),
        Command::Compare => commands::run_compare(&cfg),
        Command::Oracle => commands::run_oracle(&cfg),
        Command::Scenario => commands::run_scenario(&cfg),
    }?;
    match &cfg.out {
        Some(path) => {
            permcon::report::atomic_write(path, rendered.as_bytes())
                .map_err(|e| CliError::Internal(e.to_string()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
