use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use twinpp_cli::commands::{self, EvaluateArgs, PredictArgs, PrepareArgs, SimulateArgs, TrainArgs};

#[derive(Debug, Parser)]
#[command(name = "twinpp", version, long_version = twinpp_cli::LONG_VERSION)]
#[command(about = "Simulate, train and evaluate next-event predictors for marked event logs")]
struct Cli {
    /// Worker threads (0 = one per core). `--threads 1` is bit-reproducible.
    #[arg(long, global = true, env = "TWINPP_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic event log, profiles and manifest.
    Simulate(SimulateArgs),
    /// Split entities and build windowed sample files.
    Prepare(PrepareArgs),
    /// Train a network variant or a baseline.
    Train(TrainArgs),
    /// Score a checkpoint on a prepared split.
    Evaluate(EvaluateArgs),
    /// Print the next-event prediction for one entity as JSON.
    Predict(PredictArgs),
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("starting the worker pool")?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Prepare(a) => commands::prepare(&a),
        Command::Train(a) => commands::train_cmd(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Predict(a) => {
            let next = commands::predict(&a)?;
            println!("{}", serde_json::to_string_pretty(&next)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
