//! Command-line harness: analytic reports, simulation runs, parameter sweeps
//! and validation against the simulator and oracles.

pub mod acceptance;
pub mod commands;
pub mod rows;
pub mod validate;
pub mod verdict;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    /// Stability bound violated or a fixed point / quadrature failed.
    #[error("{0}")]
    Unstable(String),
    #[error("no data: {0}")]
    NoData(String),
    #[error("{failed} of {total} checks failed")]
    ValidationFailed { failed: usize, total: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) => 1,
            CliError::Unstable(_) => 2,
            CliError::NoData(_) => 3,
            CliError::ValidationFailed { .. } => 4,
        }
    }
}
