use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use secnet_cli::{run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.output.is_none() {
                let mut out = std::io::stdout().lock();
                let _ = out.write_all(outcome.body.as_bytes());
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
