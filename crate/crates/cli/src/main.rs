use std::process::ExitCode;

use clap::Parser;
use tracelab_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tracelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
