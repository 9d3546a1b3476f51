//! Voltage-space modeling, figure pipelines and their configuration.

mod config;
mod io;
mod reproduce;
mod voltage;

pub use config::{Config, FigureSettings, NoiseSettings, Range, SolverSettings};
pub use io::{read_csv_columns, write_atomic};
pub use reproduce::{conventions, reproduce, Figure, RunReport};
pub use voltage::{
    cp_compensation, detuning_from_voltages, stability_map, tc_from_barrier, BarrierCalibration,
    LeverArmMatrix, StabilityMap, SweepAxis, SweepSpec,
};

use crate::fitting::FitError;
use crate::qubit_cavity::QubitCavityError;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("configuration is missing required entries: {}", .0.join(", "))]
    MissingEntries(Vec<String>),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("{0}")]
    Singular(String),
    #[error("did not converge: {0}")]
    NotConverged(String),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("{0}")]
    Data(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl ScenarioError {
    /// Process exit status: 2 for configuration problems, 3 for solver or
    /// fit non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::MissingEntries(_) | Self::InvalidSweep(_) => 2,
            Self::NotConverged(_) | Self::Fit(FitError::Singular { .. }) => 3,
            _ => 1,
        }
    }
}

impl From<QubitCavityError> for ScenarioError {
    fn from(e: QubitCavityError) -> Self {
        match e {
            QubitCavityError::InvalidSweep(m) => Self::InvalidSweep(m),
            other => Self::Config(other.to_string()),
        }
    }
}
