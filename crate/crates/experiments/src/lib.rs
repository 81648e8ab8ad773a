//! Benchmark cases, experiment drivers, reports and the command-line harness
//! for the quasi-1D entropy stable solvers.

pub mod cases;
pub mod cli;
pub mod manufactured;
pub mod nozzle;
pub mod report;
pub mod runs;
pub mod verify;

use quasi1d::semidisc::SemidiscError;
use quasi1d::time_integration::{IntegrationError, IntegratorConfig, Method};
use thiserror::Error;

pub use report::{ConvergenceTable, DataSet, ExperimentReport, OutputFormat};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Semidisc(#[from] SemidiscError),
    #[error(transparent)]
    Integration(#[from] IntegrationError<SemidiscError>),
    #[error(transparent)]
    Nozzle(#[from] nozzle::NozzleError),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl ExperimentError {
    /// Process exit code: 2 for bad arguments, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::InvalidInput(_)
            | ExperimentError::Nozzle(nozzle::NozzleError::InvalidRegime { .. } | nozzle::NozzleError::Geometry(_)) => 2,
            _ => 1,
        }
    }
}

/// Time stepping choice shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepping {
    pub method: Method,
    /// CFL number for RK4 steps (and the initial adaptive step).
    pub cfl: f64,
    /// Absolute and relative tolerance of the adaptive method.
    pub tol: f64,
}

impl TimeStepping {
    pub fn rk4(cfl: f64) -> Self {
        Self { method: Method::Rk4Classic, cfl, tol: 1e-8 }
    }

    pub fn adaptive(tol: f64) -> Self {
        Self { method: Method::Rk45Embedded, cfl: 0.5, tol }
    }

    pub fn integrator(&self, t_final: f64) -> IntegratorConfig {
        IntegratorConfig {
            method: self.method,
            t_final,
            cfl: self.cfl,
            abs_tol: self.tol,
            rel_tol: self.tol,
            ..IntegratorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(ExperimentError::InvalidInput(format!("cfl must be in (0, 1], got {}", self.cfl)));
        }
        if !(self.tol > 0.0) {
            return Err(ExperimentError::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self.method {
            Method::Rk4Classic => format!("rk4 cfl={}", self.cfl),
            Method::Rk45Embedded => format!("dopri5 tol={:e}", self.tol),
        }
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T, ExperimentError> {
    Err(ExperimentError::InvalidInput(msg.into()))
}
