//! `spvt`: command-line front end to the trading laboratory.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 on numeric failure.

mod cli;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use spvt_core::SpvtError;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SpvtError>() {
            return if e.is_validation() { 2 } else { 3 };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let args = match config::merge_config(std::env::args_os().collect()) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
