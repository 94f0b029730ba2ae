use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use picod::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(outcome.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(err) => {
            eprintln!("picod: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
