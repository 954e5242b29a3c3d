mod args;
mod bench;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{Failure, Report};

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::UpdateSet => commands::update_set(cli),
        Command::Select { bounds } => commands::select(cli, bounds.map(|b| b.0)),
        Command::ExtractCount { radius } => commands::extract(cli, *radius),
        Command::Stress { rounds } => commands::stress(cli, *rounds),
        Command::Bench => bench::run(cli),
        Command::Leaks { inject_leak } => commands::leaks(cli, *inject_leak),
    }
}

fn emit(cli: &Cli, csv: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, csv),
        None => std::io::stdout().lock().write_all(csv.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(e) = emit(&cli, &report.csv) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::FAILURE;
    }
    for line in &report.summary {
        eprintln!("{line}");
    }
    match report.violation {
        Some(v) => {
            eprintln!("invariant violated: {v}");
            ExitCode::FAILURE
        }
        None => ExitCode::SUCCESS,
    }
}
