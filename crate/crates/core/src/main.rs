use std::io::Write;
use std::process::ExitCode;

use ainfty::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            for line in &outcome.lines {
                // A closed pipe is not an engine error.
                if writeln!(out, "{line}").is_err() {
                    break;
                }
            }
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("ERROR {e}");
            ExitCode::from(2)
        }
    }
}
