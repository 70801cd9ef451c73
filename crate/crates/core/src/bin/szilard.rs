use std::process::ExitCode;

use clap::Parser;
use szilard_battery::cli::Cli;

fn main() -> ExitCode {
    match Cli::parse().execute() {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
