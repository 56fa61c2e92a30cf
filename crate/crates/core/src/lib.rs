//! Numerical laboratory for semilinear heat equations with an inverse-square
//! potential and a weighted power reaction.
//!
//! All algorithms are generic over the scalar type (`f32` or `f64`); the
//! `*F64` aliases fix the common double-precision instantiation.

pub mod certificates;
pub mod error;
pub mod exponents;
pub mod kernels;
pub mod pde_sim;
pub mod quadrature;
pub mod scalar;
pub mod spectral;

pub use error::{LabError, Result};
pub use scalar::Real;

pub type PotentialSpecF64 = exponents::PotentialSpec<f64>;
pub type ReactionSpecF64 = exponents::ReactionSpec<f64>;
pub type RegimeReportF64 = exponents::RegimeReport<f64>;
pub type KernelParamsF64 = kernels::KernelParams<f64>;
pub type DuhamelParamsF64 = kernels::DuhamelParams<f64>;
pub type EigenProblemF64 = spectral::EigenProblem<f64>;
pub type EigenPairF64 = spectral::EigenPair<f64>;
pub type ProblemSpecF64 = pde_sim::ProblemSpec<f64>;
pub type SolverConfigF64 = pde_sim::SolverConfig<f64>;
pub type SolveOutcomeF64 = pde_sim::SolveOutcome<f64>;
pub type SupersolutionParamsF64 = certificates::SupersolutionParams<f64>;
pub type MomentModelF64 = certificates::MomentModel<f64>;
