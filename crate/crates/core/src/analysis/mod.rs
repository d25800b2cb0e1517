//! Verification studies: stability constants, manufactured convergence, locking.

pub mod convergence;
pub mod locking;
pub mod manufactured;
pub mod norms;
pub mod quadrature;
pub mod stability;

pub use convergence::{convergence_study, fit_rate, ConvergenceReport, LevelErrors, StudyConfig};
pub use locking::{locking_baseline, locking_study, LockingRow};
pub use manufactured::{ExactSolution, ManufacturedProblem};
pub use norms::{error_norms, ErrorNorms};
pub use quadrature::TriangleRule;
pub use stability::{
    coercivity_constant, inf_sup_constant, inf_sup_for, local_nullspace_dim,
    macroelement_nullspace_dim, InfSup,
};

use crate::assembly::{Form, SaddleSystem};
use crate::condense::solve_condensed;
use crate::discretization::Discretization;
use crate::error::Result;
use crate::geometry::Point2;
use crate::solve::{solve_saddle, Solution, SolveOptions};

/// How to discretize and solve one mixed problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub form: Form,
    pub condensed: bool,
    pub kappa: f64,
    pub options: SolveOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            form: Form::Eps,
            condensed: false,
            kappa: 1.0,
            options: SolveOptions::default(),
        }
    }
}

/// Assembles and solves the mixed system on `disc`.
pub fn solve_mixed(
    disc: &Discretization,
    lambda: f64,
    mu: f64,
    config: &SolverConfig,
    f: &dyn Fn(Point2) -> [f64; 2],
) -> Result<(SaddleSystem, Solution)> {
    let system = SaddleSystem::assemble(disc, mu, config.form, f)?.with_kappa(config.kappa)?;
    let solution = if config.condensed {
        solve_condensed(&system, disc, lambda, &config.options)?
    } else {
        solve_saddle(&system, lambda, &config.options)?
    };
    Ok((system, solution))
}
