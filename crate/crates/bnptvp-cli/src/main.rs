//! Pipeline entry point: simulate -> fit -> graphs -> diagnose.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical abort.

mod commands;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{Cli, CommandError};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes, not usage errors.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(match err {
                CommandError::Usage(_) => 1,
                CommandError::Data(_) => 2,
                CommandError::Numerical(_) => 3,
            });
        }
    }
}
