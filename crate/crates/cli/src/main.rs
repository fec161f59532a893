//! `negfuse`: fit, select and evaluate Bayesian fused lasso models with NEG
//! priors from the command line.

mod args;
mod commands;
mod config;
mod error;
mod io;
mod manifest;
mod svg;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("negfuse: {e}");
            ExitCode::from(e.code())
        }
    }
}
