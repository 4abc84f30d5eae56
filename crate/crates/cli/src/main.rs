//! `bestprox`: solve, tabulate, verify and inspect the modulus of convexity.

mod args;
mod commands;
mod exit;
mod format;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => commands::solve::run(a),
        Command::Table(a) => commands::table::run(a),
        Command::Verify(a) => commands::verify::run(a),
        Command::Modulus(a) => commands::modulus::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bestprox: {e}");
            e.code()
        }
    }
}
