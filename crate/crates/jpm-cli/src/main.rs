//! Command-line front end for the JPM detector model.
//!
//! Exit codes: 0 success, 1 domain/configuration error, 2 usage error,
//! 3 reproduction-gate failure (`table1` only).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "jpm", version, about = "Two-photon Josephson photomultiplier simulator")]
struct Cli {
    /// Run configuration file (flat `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for generated CSV files (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for `sweep` (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Factor by which "much less than" conditions must hold.
    #[arg(long, global = true)]
    mleq_factor: Option<f64>,

    /// Margin of the photon-number resolution bound.
    #[arg(long, global = true)]
    margin: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Well geometry and transition frequencies.
    Levels,
    /// Tunneling actions and escape rates of the metastable levels.
    Wkb,
    /// Couplings, Stark shifts, absorption rates and photon resolution.
    Rates,
    /// Integrate the joint density matrix and emit a trajectory CSV.
    Simulate,
    /// Count probabilities and discrimination error over the time grid.
    Ratecurves,
    /// Detection report for the two-step counting protocol.
    Protocol,
    /// Reproduce the reference operating point; exits 3 on any failure.
    Table1,
    /// Evaluate the validity conditions of the analytic layer.
    Check,
    /// Grid sweep over one or two config fields, in parallel.
    Sweep {
        /// Primary axis, `field=start:stop:points` (linear grid).
        #[arg(long)]
        field: String,
        /// Optional secondary axis, same format.
        #[arg(long)]
        field2: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code)
        }
    }
}

/// Error carrying the process exit code (1 domain, 2 usage).
pub struct CliError {
    pub message: String,
    pub exit_code: u8,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl CliError {
    pub fn domain(message: impl Into<String>) -> Self {
        CliError { message: message.into(), exit_code: 1 }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError { message: message.into(), exit_code: 2 }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::domain(e.0)
    }
}

impl From<jpm_core::Error> for CliError {
    fn from(e: jpm_core::Error) -> Self {
        CliError::domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::domain(e.to_string())
    }
}
