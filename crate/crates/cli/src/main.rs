//! `netgame`: generate networks, solve and simulate network games, and
//! estimate their payoff parameters from files.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::load;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "netgame", version, about = "Multinomial-logit games on friendship networks")]
struct Cli {
    /// TOML run configuration for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base seed; overrides any seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a network and covariates.
    Generate,
    /// Solve the equilibrium (or its h-hop approximation) on given data.
    Solve,
    /// Draw actions from the equilibrium.
    Simulate,
    /// Approximate maximum likelihood with standard errors.
    Estimate,
    /// Repeated simulation and estimation.
    Montecarlo,
    /// Window-matching estimate of one player's choice probability on a circle.
    Npestimate {
        /// 1-based player id.
        #[arg(long)]
        target: Option<usize>,
        /// Window half-width.
        #[arg(long)]
        h: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let ctx = Context {
        out: cli.out,
        seed: cli.seed,
    };
    match cli.command {
        Command::Generate => commands::generate(load(&path)?, &ctx),
        Command::Solve => commands::solve(load(&path)?, &ctx),
        Command::Simulate => commands::simulate(load(&path)?, &ctx),
        Command::Estimate => commands::estimate(load(&path)?, &ctx),
        Command::Montecarlo => commands::montecarlo(load(&path)?, &ctx),
        Command::Npestimate { target, h } => commands::npestimate(load(&path)?, target, h, &ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
