//! Batch front-end for `fujita-core`: exponents, classification, simulation,
//! parameter sweeps, kernels, eigenvalues, certificates and Duhamel bounds.

pub mod commands;
pub mod config;
pub mod sweep;

use std::io::Write;

use fujita_core::LabError;

pub use config::{parse_config, parse_config_str, resolve, Format, Mode, RunConfig, ValueList};
pub use sweep::{run_sweep, write_sweep_csv, SweepPoint, SweepRow, SweepSettings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Domain(_) | LabError::InvalidParams(_) | LabError::Infeasible(_) => {
                Self::Validation(e.to_string())
            }
            LabError::QuadratureNonConvergence { .. } | LabError::EigenSolver(_) | LabError::SolverConfig(_) => {
                Self::Numerical(e.to_string())
            }
        }
    }
}

/// What a mode produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// Human-readable lines.
    pub summary: String,
    /// CSV or JSON payload.
    pub body: String,
    /// Table modes print the body on stdout when no output file is set.
    pub table: bool,
    /// Sweep rows or batch items that failed numerically.
    pub failures: usize,
}

/// Run the configured mode and emit its output. Returns the exit status.
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    let out = commands::execute(cfg)?;
    emit(cfg, &out)?;
    Ok(if out.failures > 0 { 3 } else { 0 })
}

fn emit(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    let io = |e: std::io::Error| CliError::Validation(format!("cannot write output: {e}"));
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, &out.body)
                .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
            write!(so, "{}", out.summary).map_err(io)?;
        }
        None if out.table => {
            eprint!("{}", out.summary);
            write!(so, "{}", out.body).map_err(io)?;
        }
        None => write!(so, "{}", out.summary).map_err(io)?,
    }
    Ok(())
}
