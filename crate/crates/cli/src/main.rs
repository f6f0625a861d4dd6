//! `monord`: fit, simulate and inspect monotone ordinal regression models.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use monord_core::Error;

use args::{Cli, Command};

/// Exit status for argument and configuration mistakes.
pub const EXIT_USAGE: u8 = 1;
/// Exit status for unreadable or malformed input data.
pub const EXIT_DATA: u8 = 2;
/// Exit status for sampler failures and violated invariants.
pub const EXIT_RUNTIME: u8 = 3;

/// A mistake in how the command was invoked.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_status(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_)) => EXIT_USAGE,
        Some(Error::Io { .. }) => EXIT_DATA,
        Some(e) if e.is_data_error() => EXIT_DATA,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::PriorCheck(a) => commands::prior_check(a),
        Command::Predict(a) => commands::predict(a),
        Command::Diag(a) => commands::diag(a),
        Command::Baseline(a) => commands::baseline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
