use std::io::Write;
use std::process::ExitCode;

use caching_cli::{render, run, Cli, EXIT_OK};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(render(&report, cli.config.format).as_bytes()).is_err() {
                return ExitCode::from(caching_cli::EXIT_INTERNAL as u8);
            }
            ExitCode::from(EXIT_OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
