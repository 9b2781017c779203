//! Command-line runner for `feller-stop` experiments.
//!
//! Exit codes: 0 success, 1 failed cross-check or runtime error,
//! 2 invalid configuration, 3 solver finished with warnings.

pub mod build;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{FigureName, RunContext};
use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_WARNING: i32 = 3;

/// A problem with the user's input rather than with the computation.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Parser)]
#[command(name = "feller-stop", version, about = "Optimal stopping experiments for Feller processes")]
pub struct Cli {
    /// Seed for Monte Carlo runs, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid node count, overriding the config.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the configured problem and write value, region and diagnostics.
    Solve {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data behind one of the reference figures.
    Figure {
        name: FigureName,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON file overriding figure parameters.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Compare solver, closed form and simulation; exit 0 only if all agree.
    Crosscheck {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config and the generator it builds.
    Validate { config: PathBuf },
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ValidationError>().is_some() {
        EXIT_INVALID
    } else {
        EXIT_FAILED
    }
}

pub fn run(cli: Cli) -> i32 {
    let ctx = RunContext {
        seed: cli.seed,
        grid_n: cli.grid_n,
        quiet: cli.quiet,
    };
    let result = (|| -> anyhow::Result<i32> {
        if ctx.grid_n.is_some_and(|n| n < 3) {
            return Err(ValidationError("--grid-n: need at least 3 nodes".into()).into());
        }
        match cli.command {
            Command::Solve { config, out } => {
                let cfg = ExperimentConfig::load(&config)?;
                commands::solve(&cfg, &commands::output_dir(out, Some(&cfg)), &ctx)
            }
            Command::Figure { name, out, params } => {
                commands::figure(name, params.as_deref(), &commands::output_dir(out, None), &ctx)
            }
            Command::Crosscheck { config, out } => {
                let cfg = ExperimentConfig::load(&config)?;
                commands::crosscheck(&cfg, &commands::output_dir(out, Some(&cfg)), &ctx)
            }
            Command::Validate { config } => {
                let cfg = ExperimentConfig::load(&config)?;
                commands::validate(&cfg, &ctx)
            }
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
