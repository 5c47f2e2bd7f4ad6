//! Command-line laboratory for standing waves of the one-dimensional
//! nonlinear Klein-Gordon equation: profile construction, linearized
//! spectra, time evolution, and orbit-escape experiments.
//!
//! Exit codes: 0 success, 2 invalid configuration (nothing written),
//! 3 blow-up detected (outputs still written), 4 internal error.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};

use config::{CommonArgs, RunConfig, SweepArgs, SweepConfig};
use output::CmdError;

#[derive(Parser)]
#[command(name = "kgsim", version, about = "standing-wave laboratory for the 1D nonlinear Klein-Gordon equation", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a standing-wave profile and its scalar summary.
    Groundstate(CommonArgs),
    /// Low eigenpairs and coercivity margin of the second variation.
    Spectrum(CommonArgs),
    /// Integrate a perturbed wave and track its modulation decomposition.
    Evolve(CommonArgs),
    /// Escape experiment: virial growth and orbit distance over time.
    Instability(CommonArgs),
    /// Escape experiments over a Cartesian parameter grid.
    Sweep(SweepArgs),
}

fn dispatch(cli: &Cli) -> Result<i32, CmdError> {
    match &cli.command {
        Command::Groundstate(args) => {
            let config = RunConfig::assemble("groundstate", args).map_err(CmdError::Validation)?;
            commands::groundstate::run(&config).map(|()| 0)
        }
        Command::Spectrum(args) => {
            let config = RunConfig::assemble("spectrum", args).map_err(CmdError::Validation)?;
            commands::spectrum::run(&config).map(|()| 0)
        }
        Command::Evolve(args) => {
            let config = RunConfig::assemble("evolve", args).map_err(CmdError::Validation)?;
            commands::evolve::run(&config)
        }
        Command::Instability(args) => {
            let config = RunConfig::assemble("instability", args).map_err(CmdError::Validation)?;
            commands::instability::run(&config)
        }
        Command::Sweep(args) => {
            let sweep = SweepConfig::assemble(args).map_err(CmdError::Validation)?;
            commands::sweep::run(&sweep).map(|()| 0)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {}", err.message());
            std::process::exit(err.exit_code());
        }
    }
}
