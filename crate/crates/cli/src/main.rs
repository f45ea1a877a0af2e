use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tsvsim_cli::{execute, write_file, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = execute(&cli).and_then(|outcome| {
        match &cli.out {
            Some(path) => write_file(path, &outcome.document)?,
            None => {
                let _ = std::io::stdout().write_all(outcome.document.as_bytes());
            }
        }
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
