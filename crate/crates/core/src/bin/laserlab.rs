use std::process::ExitCode;

use clap::Parser;
use laserlab::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    match cli::run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("laserlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
