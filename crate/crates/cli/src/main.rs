//! `sparchsim` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, input or configuration error, 2 simulation
//! contract violation, 3 verification mismatch.

mod args;
mod commands;
mod input;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Simulation(String),
    Mismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Simulation(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Simulation(m) | CliError::Mismatch(m) => f.write_str(m),
        }
    }
}

impl From<sparchsim::Error> for CliError {
    fn from(e: sparchsim::Error) -> Self {
        use sparchsim::Error as E;
        match e {
            E::Contract(_) | E::Plan(_) | E::Stall { .. } => CliError::Simulation(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Gen(a) => commands::gen(a),
        Command::Model(a) => commands::model(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e {
                CliError::Usage(_) => "error",
                CliError::Simulation(_) => "simulation error",
                CliError::Mismatch(_) => "verification failed",
            };
            eprintln!("sparchsim: {kind}: {e}");
            ExitCode::from(e.code())
        }
    }
}
