use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation leakage {deficit:.3e} in column {column} exceeds bound {bound:.1e}")]
    LeakageExceeded {
        column: usize,
        deficit: f64,
        bound: f64,
    },

    #[error("sweep step size too coarse: halving the step count moves a population by {change:.3e}")]
    StepSizeTooCoarse { change: f64 },

    #[error("calibration target {target} outside reachable range [{low}, {high}] for f_x in [0, 1]")]
    CalibrationOutOfRange { target: f64, low: f64, high: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing table {}", .0.display())]
    MissingTable(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
