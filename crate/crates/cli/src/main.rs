use std::process::ExitCode;

use clap::Parser;
use dbar_cli::args::Cli;
use dbar_cli::error::{CliError, CHECK_FAILED};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match start(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn start(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = dbar_cli::thread_cap()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    let outcome = dbar_cli::run(cli)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    Ok(outcome.passed)
}
