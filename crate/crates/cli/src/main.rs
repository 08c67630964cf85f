mod args;
mod commands;
mod config;
mod error;
mod output;
mod plots;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Frozen(a) => commands::frozen(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::FitSurface(a) => commands::fit_surface_cmd(a),
        Command::Macro(a) => commands::macro_cmd(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
