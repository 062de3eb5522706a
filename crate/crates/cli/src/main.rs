//! `hclab`: batch front end of the numerical lab. Each subcommand reads a
//! JSON configuration, writes CSV files and `report.json` to the output
//! directory, prints a table, and exits with
//! 0 pass, 1 criterion fail, 2 config error, 3 capacity, 4 I/O.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use output::{Failure, Outcome, RunContext};

#[derive(Parser)]
#[command(
    name = "hclab",
    version,
    about = "Schedules, coverings, criteria and probes for weighted backward shift families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration of the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "hclab-out")]
    out: PathBuf,
    /// Worker threads for data-parallel loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of the randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build a schedule: recursion, covering solver, or curve schedule.
    Schedule,
    /// Build the canonical covering of a parameter set.
    Cover,
    /// Check criteria on a schedule, plus an optional seeded sweep.
    Verify,
    /// Synthesize a candidate vector and verify its orbits.
    Construct,
    /// Run a separation, diameter or gauge probe.
    Probe,
    /// Compare cell orderings by their greedy schedules.
    Orderings,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Schedule => "schedule",
            Command::Cover => "cover",
            Command::Verify => "verify",
            Command::Construct => "construct",
            Command::Probe => "probe",
            Command::Orderings => "orderings",
        }
    }
}

/// Loads the config, runs the subcommand and writes the report.
fn execute<T: DeserializeOwned>(
    path: &Path,
    ctx: &RunContext,
    run: impl FnOnce(&T, &RunContext) -> Result<Outcome, Failure>,
) -> Result<Outcome, Failure> {
    let (config, raw) = config::load::<T>(path)?;
    ctx.prepare()?;
    let result = run(&config, ctx);
    ctx.report(&raw, &result)?;
    result
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_env("HCLAB_LOG"))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let Some(path) = cli.config.as_deref() else {
        eprintln!("config error: --config <path.json> is required");
        return ExitCode::from(2);
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("config error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = RunContext {
        command: cli.command.name(),
        out: cli.out.clone(),
        seed: cli.seed,
        config_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    tracing::info!(command = ctx.command, config = %path.display(), "start");
    let result = match cli.command {
        Command::Schedule => execute(path, &ctx, commands::schedule::run),
        Command::Cover => execute(path, &ctx, commands::cover::run),
        Command::Verify => execute(path, &ctx, commands::verify::run),
        Command::Construct => execute(path, &ctx, commands::construct::run),
        Command::Probe => execute(path, &ctx, commands::probe::run),
        Command::Orderings => execute(path, &ctx, commands::orderings::run),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.table);
            println!(
                "{}: {}",
                ctx.command,
                if outcome.passed { "PASS" } else { "FAIL" }
            );
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(failure) => {
            eprintln!("{failure}");
            failure.exit_code()
        }
    }
}
