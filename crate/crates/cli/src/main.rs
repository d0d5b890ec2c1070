mod args;
mod commands;
mod grid;
mod output;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command, OutputFormat};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] fraclrd::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (table, run) = match &cli.command {
        Command::Moments(a) => (commands::moments(a)?, a),
        Command::Corr(a) => (commands::corr(a)?, a),
        Command::Classify(a) => (commands::classify(a)?, &a.run),
        Command::Delta(a) => (commands::delta(a)?, &a.run),
        Command::Simulate(a) => (commands::simulate(a)?, a),
    };
    let rendered = match run.output {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    match &run.out {
        Some(path) => std::fs::write(path, rendered).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(rendered.as_bytes()).map_err(|e| CliError::Io(format!("writing stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
