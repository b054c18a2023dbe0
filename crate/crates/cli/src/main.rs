//! Command-line front end: single simulations, figure presets and Monte
//! Carlo checks, all written as CSV.

mod commands;
mod config;
mod csv;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fiberdd::presets::Figure;

use config::{Command, Overrides, RawConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "fiberdd",
    version,
    about = "Dynamical decoupling of entangled photons in birefringent fiber"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Concurrence along the fiber for one pulse sequence.
    Simulate {
        #[command(flatten)]
        opts: Overrides,
    },
    /// Regenerate a figure preset (fig2a, fig2b, fig3, fig4).
    Figure {
        preset: Figure,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Compare the analytic coherence factor with a Monte Carlo estimate.
    McCheck {
        #[command(flatten)]
        opts: Overrides,
    },
    /// Resolve and validate the configuration without running anything.
    ValidateConfig {
        #[command(flatten)]
        opts: Overrides,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, opts) = match &cli.command {
        Cmd::Simulate { opts } => (Command::Simulate, opts),
        Cmd::Figure { opts, .. } => (Command::Figure, opts),
        Cmd::McCheck { opts } => (Command::McCheck, opts),
        Cmd::ValidateConfig { opts } => (Command::ValidateConfig, opts),
    };
    let raw = RawConfig::resolve(command, opts)?;
    print!("{raw}");
    let config = raw.build()?;
    match cli.command {
        Cmd::Simulate { .. } => commands::simulate(&config),
        Cmd::Figure { preset, .. } => commands::figure(preset, &config),
        Cmd::McCheck { .. } => commands::mc(&config),
        Cmd::ValidateConfig { .. } => {
            println!("configuration ok");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
