//! Library behind the `dbar` binary: argument types, input resolution,
//! subcommands and output writers.

pub mod args;
pub mod commands;
pub mod error;
pub mod inputs;
pub mod output;

use args::{Cli, Command};
use commands::Outcome;
use error::CliError;

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Solve(a) => commands::solve_cmd(a),
        Command::Verify(a) => commands::verify_cmd(a),
        Command::LpProbe(a) => commands::lp_probe_cmd(a),
        Command::IdentityCheck(a) => commands::identity_cmd(a),
        Command::CorpusList(a) => commands::corpus_list_cmd(a),
    }
}

/// Worker count from `DBAR_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("DBAR_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "DBAR_THREADS must be a positive integer, got `{s}`"
            ))),
        },
    }
}
