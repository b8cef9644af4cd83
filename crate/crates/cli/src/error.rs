use std::path::PathBuf;

use dbar_core::forms::FormError;
use dbar_core::kernel::QuadratureError;
use dbar_core::solver::SolverError;
use dbar_core::variety::VarietyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot read {}: {source}", path.display())]
    MissingFile { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Solver(SolverError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("{0}")]
    Other(String),
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Variety(v) => CliError::Variety(v),
            SolverError::Form(f) => CliError::Form(f),
            other => CliError::Solver(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) | CliError::Write { .. } => 1,
            CliError::Config(_) | CliError::MissingFile { .. } => 2,
            CliError::Variety(_) => 3,
            CliError::Form(_) => 4,
            CliError::Solver(_) | CliError::Quadrature(_) => 5,
        }
    }
}

/// Exit code when a run completes but a check fails.
pub const CHECK_FAILED: u8 = 6;
