use std::process::ExitCode;

use clap::Parser;
use starnls_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.execute() {
        Ok(outcome) => {
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            if outcome.mismatch {
                eprintln!("starnls: analytic and oracle counts disagree");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("starnls: {e:#}");
            ExitCode::FAILURE
        }
    }
}
