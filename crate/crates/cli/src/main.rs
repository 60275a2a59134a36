mod commands;
mod config;
mod error;
mod output;

use clap::Parser;
use commands::Outcome;
use config::{Cli, Command};
use error::CliError;
use std::process::ExitCode;

fn run(cli: &Cli) -> Result<(), CliError> {
    let (cfg, out) = config::resolve(cli)?;
    let outcome = match &cli.command {
        Command::Bifdiag(_) => Outcome { tables: commands::bifdiag::run(&cfg)?, failure: None },
        Command::Monodromy(_) => commands::monodromy::run(&cfg)?,
        Command::Scatter(_) => commands::scatter::run(&cfg)?,
    };
    for t in &outcome.tables {
        let path = output::write(t, &cfg, &out)?;
        println!("{}", path.display());
    }
    match outcome.failure {
        Some(msg) => Err(CliError::Unreliable(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twocenter: {e}");
            e.exit_code()
        }
    }
}
