use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qfloquet_cli::error::EXIT_USAGE;
use qfloquet_cli::{execute, Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = execute(&cli).and_then(|out| match &out.path {
        Some(path) => fs::write(path, &out.text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            let _ = std::io::stdout().write_all(out.text.as_bytes());
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
