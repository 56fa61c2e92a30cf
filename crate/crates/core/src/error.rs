use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter struct violates one of its invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// No supersolution parameters exist for the requested exponent.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}, tolerance {tolerance:e}")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    /// An iterative eigen-solver failed.
    #[error("eigensolver failure: {0}")]
    EigenSolver(String),

    /// Time stepping could not proceed (step underflow away from blow-up, etc).
    #[error("solver configuration error: {0}")]
    SolverConfig(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Domain(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidParams(msg.into()))
}
