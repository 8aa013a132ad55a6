//! `myxo`: experiment driver for the myxo kinetic model.

mod commands;
mod config;
mod init;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::CliError;

#[derive(Debug, Parser)]
#[command(name = "myxo", version, about = "Kinetic alignment/reversal model experiments")]
struct Cli {
    /// JSON file with the command's parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the spatially homogeneous model.
    Simulate(commands::SimulateArgs),
    /// Linear spectrum around the uniform equilibrium.
    Spectrum(commands::SpectrumArgs),
    /// Equilibrium amplitude sweep below the critical diffusivity.
    Bifurcate(commands::BifurcateArgs),
    /// Small-diffusivity peak profile by damped Picard iteration.
    Fixedpoint(commands::FixedpointArgs),
    /// Full model on the torus with transport.
    Spatial(commands::SpatialArgs),
    /// Compare a small-diffusivity equilibrium with the rescaled peak profile.
    CompareSmallmu(commands::CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("myxo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    }
    let ctx = commands::Context {
        config: cli.config.as_deref(),
        out: &cli.out,
        threads: cli.threads.unwrap_or_else(rayon::current_num_threads),
    };
    match &cli.command {
        Command::Simulate(args) => commands::simulate(&ctx, args),
        Command::Spectrum(args) => commands::spectrum(&ctx, args),
        Command::Bifurcate(args) => commands::bifurcate(&ctx, args),
        Command::Fixedpoint(args) => commands::fixedpoint(&ctx, args),
        Command::Spatial(args) => commands::spatial(&ctx, args),
        Command::CompareSmallmu(args) => commands::compare_smallmu(&ctx, args),
    }
}
