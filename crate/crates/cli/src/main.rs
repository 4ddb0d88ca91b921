//! `molinfer`: featurize a dataset, train a prediction function, infer a
//! chemical graph for a target value and search its grid neighborhood.
//!
//! Exit status is 0 on success, 2 when the solver proves that no graph
//! exists, and 1 on any error.

mod config;
mod demo;
mod pipeline;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{Overrides, PipelineConfig};
use pipeline::Outcome;

#[derive(Parser)]
#[command(name = "molinfer", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Replaces the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solver time limit in seconds per MILP.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Solver executable (HiGHS or CBC).
    #[arg(long, global = true)]
    solver: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the descriptor registry and the feature table.
    Featurize { config: PathBuf },
    /// Cross-validate and train the prediction function.
    Train { config: PathBuf },
    /// Solve the inverse problem for the target interval.
    Infer { config: PathBuf },
    /// Search the grids around the inferred graph.
    GridSearch { config: PathBuf },
    /// Predict graph files, or score the dataset when none are given.
    Eval {
        config: PathBuf,
        graphs: Vec<PathBuf>,
    },
    /// Write a synthetic dataset with a ready-made config.
    Demo {
        dir: PathBuf,
        #[arg(long, default_value_t = 40)]
        size: usize,
    },
}

fn execute(cli: Cli) -> Result<Outcome> {
    let overrides = Overrides {
        seed: cli.seed,
        time_limit: cli.time_limit,
        solver: cli.solver,
    };
    let load = |p: &PathBuf| PipelineConfig::load(p, &overrides);
    match &cli.command {
        Command::Featurize { config } => pipeline::featurize(&load(config)?),
        Command::Train { config } => pipeline::train(&load(config)?),
        Command::Infer { config } => pipeline::infer(&load(config)?),
        Command::GridSearch { config } => pipeline::grid(&load(config)?),
        Command::Eval { config, graphs } => pipeline::eval(&load(config)?, graphs),
        Command::Demo { dir, size } => {
            demo::write_demo(dir, *size, overrides.seed.unwrap_or(1))?;
            println!("wrote a {size}-graph dataset and config.toml to {}", dir.display());
            Ok(Outcome::Done)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
