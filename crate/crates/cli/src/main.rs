//! `erw`: simulate excited random walks, run couplings, check birth-death
//! chain inequalities and fit scaling laws.
//!
//! Exit codes: 0 success, 1 a requested assertion failed, 2 usage or
//! validation error. Progress goes to standard error; standard output
//! carries only data.

mod bdchain;
mod couple;
mod fit;
mod manifest;
mod parse;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "erw", version, about = "Excited random walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write per-horizon statistics.
    Simulate(simulate::Args),
    /// Couple two walks from nested configurations and compare visit counts.
    Couple(couple::Args),
    /// Hitting probabilities and inequality checks for birth-death chains.
    Bdchain(bdchain::Args),
    /// Fit scaling models to a statistics CSV.
    Fit(fit::Args),
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, files or configurations (exit 2).
    Usage(String),
    /// A requested check failed (exit 1).
    Assertion(String),
}

impl From<erw_core::Error> for Failure {
    fn from(e: erw_core::Error) -> Self {
        match e {
            erw_core::Error::CouplingViolation { .. } => Failure::Assertion(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Couple(a) => couple::run(a),
        Command::Bdchain(a) => bdchain::run(a),
        Command::Fit(a) => fit::run(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("erw: check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("erw: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Seed from the flag, else the `ERW_SEED` environment variable, else 0,
/// with the source recorded.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<(u64, &'static str), Failure> {
    if let Some(s) = flag {
        return Ok((s, "flag"));
    }
    if let Some(s) = file {
        return Ok((s, "config"));
    }
    match std::env::var("ERW_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(|s| (s, "env"))
            .map_err(|_| Failure::Usage(format!("ERW_SEED='{v}' is not an unsigned integer"))),
        Err(_) => Ok((0, "default")),
    }
}
