//! Command-line front end: configuration ingestion, experiment dispatch,
//! output management and reproducibility controls.
//!
//! Every run resolves its configuration from defaults, an optional flat
//! key-value JSON file (`--config`), command-line flags (which override the
//! file) and finally the `HYDROCHAIN_SEED` environment variable. The
//! resolved config is written next to the outputs as `manifest.json`;
//! feeding a manifest back through `--config` reproduces the run byte for
//! byte, for any `--workers` value.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 output I/O
//! error, 4 experiment ran but an invariant band failed, 1 other runtime
//! errors.

mod config;
mod outputs;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CliArgs, Resolved};

#[derive(Parser)]
#[command(
    name = "hydrochain",
    version,
    about = "Isothermal anharmonic chain simulator and thermodynamic verification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate single-spring thermodynamics as CSV on stdout
    Thermo(CliArgs),
    /// Integrate an ensemble of microscopic chains
    MicroRun(CliArgs),
    /// Solve the macroscopic viscous p-system
    PdeRun(CliArgs),
    /// Empirical-measure convergence against the macro solution
    LimitCheck(CliArgs),
    /// Isothermal transformation: work, free energy and the Clausius gap
    Clausius(CliArgs),
    /// Exponential relaxation fit after the tension freezes
    Relaxation(CliArgs),
    /// Microscopic first-law ensemble against thermodynamic targets
    FirstLaw(CliArgs),
    /// Block-average tension residual on a stationary run
    OneBlock(CliArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Thermo(_) => "thermo",
            Command::MicroRun(_) => "micro-run",
            Command::PdeRun(_) => "pde-run",
            Command::LimitCheck(_) => "limit-check",
            Command::Clausius(_) => "clausius",
            Command::Relaxation(_) => "relaxation",
            Command::FirstLaw(_) => "first-law",
            Command::OneBlock(_) => "one-block",
        }
    }

    fn args(&self) -> &CliArgs {
        match self {
            Command::Thermo(a)
            | Command::MicroRun(a)
            | Command::PdeRun(a)
            | Command::LimitCheck(a)
            | Command::Clausius(a)
            | Command::Relaxation(a)
            | Command::FirstLaw(a)
            | Command::OneBlock(a) => a,
        }
    }
}

/// Outcome classification for exit codes.
pub enum Failure {
    Config(String),
    Io(String),
    Bands(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Bands(_) => 4,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Bands(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<hydrochain::Error> for Failure {
    fn from(e: hydrochain::Error) -> Self {
        use hydrochain::Error::*;
        match e {
            InvalidParameter(_) | StabilityBound { .. } | Precondition(_) => {
                Failure::Config(e.to_string())
            }
            Io(_) => Failure::Io(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let resolved = match Resolved::build(cli.command.name(), cli.command.args()) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}", f.message());
            return ExitCode::from(f.code());
        }
    };
    if resolved.dry_run {
        println!("{}", resolved.config_json_pretty());
        return ExitCode::SUCCESS;
    }
    let workers = resolved.workers;
    let run = || outputs::dispatch(&resolved);
    match hydrochain::par::with_workers(workers, run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
