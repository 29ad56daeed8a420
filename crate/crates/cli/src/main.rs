//! Batch experiment driver for the semimean library.
//!
//! `semimean run <config.toml> [--jobs N] [--out DIR] [--seed S]` executes
//! the experiment described by the config and writes a row-per-iteration
//! trace CSV plus a newline-delimited JSON summary per run. Exit codes:
//! 0 success, 2 configuration/parse errors, 3 numeric failures (partial
//! traces are flushed).

mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use runner::{run_all, RunStatus};

/// Environment variable overriding the built-in default output directory.
const OUT_ENV: &str = "SEMIMEAN_OUT";

#[derive(Parser)]
#[command(name = "semimean", version, about = "Ergodic-mean fixed point experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment described by a TOML config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Maximum number of concurrent runs in a sweep.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory (overrides the config and SEMIMEAN_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override for generated start points.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            jobs,
            out,
            seed,
        } => match run_command(&config, jobs, out, seed) {
            Ok(RunStatus::Ok) => ExitCode::SUCCESS,
            Ok(RunStatus::NumericFailure) => ExitCode::from(3),
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        },
    }
}

fn run_command(
    config_path: &PathBuf,
    jobs: usize,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> anyhow::Result<RunStatus> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", config_path.display()))?;
    let config = ExperimentConfig::parse(&text)?;
    let seed = seed.unwrap_or(config.seed);
    let dir = out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| config.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let prefix = config
        .output
        .as_ref()
        .map(|o| o.prefix.clone())
        .unwrap_or_else(|| "run".to_string());
    run_all(&config, seed, &dir, &prefix, jobs)
}
