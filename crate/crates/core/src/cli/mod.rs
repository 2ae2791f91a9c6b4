//! Command-line front end.

mod args;
mod bundle;
mod commands;
mod config;
mod input;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

pub use args::Cli;

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or settings. Exit code 2.
    Usage(String),
    /// Unreadable or malformed data. Exit code 3.
    Data(String),
    /// Anything else, such as a failed write. Exit code 1.
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Other(m) => f.write_str(m),
        }
    }
}

impl From<skewmix::Error> for CliError {
    fn from(e: skewmix::Error) -> Self {
        use skewmix::Error::*;
        match e {
            Parse { .. } | InvalidData(_) => CliError::Data(e.to_string()),
            InvalidParameter { .. } | InvalidConfig(_) | ProbabilityDomain(_) => CliError::Usage(e.to_string()),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
