use std::process::ExitCode;

use clap::Parser;
use mmio_cli::{run, Cli, ERROR_CODE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ERROR_CODE as u8)
        }
    }
}
