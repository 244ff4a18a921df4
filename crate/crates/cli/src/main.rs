mod args;
mod commands;
mod config;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

#[derive(Debug)]
pub enum CliError {
    Core(manip_core::Error),
    Io(String),
    Usage(String),
}

impl CliError {
    fn name(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.name(),
            CliError::Io(_) => "IoError",
            CliError::Usage(_) => "UsageError",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(manip_core::Error::SizeLimit(_)) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<manip_core::Error> for CliError {
    fn from(e: manip_core::Error) -> Self {
        CliError::Core(e)
    }
}

fn main() -> ExitCode {
    let args = match config::apply(std::env::args().collect()) {
        Ok(args) => args,
        Err(e) => return report(e),
    };
    let cli = Cli::parse_from(args);
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    let doc = serde_json::json!({"error": e.name(), "message": e.to_string()});
    eprintln!("{doc}");
    ExitCode::from(e.exit_code())
}
