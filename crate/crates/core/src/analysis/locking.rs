//! Pure-displacement P1 comparison on the same third mesh.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::analysis::convergence::ERROR_QUADRATURE_DEGREE;
use crate::analysis::manufactured::{ExactSolution, ManufacturedProblem};
use crate::analysis::norms::error_norms;
use crate::analysis::{solve_mixed, SolverConfig};
use crate::assembly::{assemble_a, assemble_div_div, assemble_f, Form};
use crate::discretization::Discretization;
use crate::error::{FeccError, Result};
use crate::geometry::Point2;
use crate::material::MaterialParams;
use crate::mesh::MeshFamily;
use crate::solve::to_faer;
use crate::sparse::TripletBuilder;

/// Solves `a(u, v) + lambda (div u, div v) = (f, v)` with the eps-form `a`.
pub fn locking_baseline(
    disc: &Discretization,
    params: &MaterialParams,
    f: &dyn Fn(Point2) -> [f64; 2],
) -> Result<Vec<f64>> {
    let a = assemble_a(&disc.third, &disc.dofs, params.mu, Form::Eps)?;
    let dd = assemble_div_div(&disc.third, &disc.dofs)?;
    let n = a.nrows();
    let mut k = TripletBuilder::new(n, n);
    for (r, c, v) in a.triplets() {
        k.push(r, c, v);
    }
    for (r, c, v) in dd.triplets() {
        k.push(r, c, params.lambda * v);
    }
    let load = assemble_f(&disc.third, &disc.dofs, f)?;
    let llt = to_faer(&k.build())?.sp_cholesky(Side::Lower).map_err(|e| {
        FeccError::FactorizationBreakdown {
            pivot: 0,
            reason: format!("{e:?}"),
        }
    })?;
    let mut rhs = Mat::from_fn(n, 1, |i, _| load[i]);
    llt.solve_in_place(rhs.as_mut());
    let u: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if u.iter().any(|v| !v.is_finite()) {
        return Err(FeccError::NonFinite("baseline displacement".into()));
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockingRow {
    pub n: usize,
    pub poisson: f64,
    pub lambda: f64,
    pub mixed_l2_u: f64,
    pub baseline_l2_u: f64,
}

impl LockingRow {
    pub fn ratio(&self) -> f64 {
        self.baseline_l2_u / self.mixed_l2_u
    }
}

/// Mixed (eps-form) and baseline displacement errors on the manufactured problem.
pub fn locking_study(family: &MeshFamily, n: usize, young: f64, poisson: &[f64]) -> Result<Vec<LockingRow>> {
    let disc = Discretization::new(family.generate(n)?)?;
    let config = SolverConfig::default();
    poisson
        .iter()
        .map(|&nu| {
            let params = MaterialParams::from_young_poisson(young, nu)?;
            let problem = ManufacturedProblem::new(params.lambda, params.mu, Form::Eps)?;
            let f = |x: Point2| problem.f(x);
            let (_, sol) = solve_mixed(&disc, params.lambda, params.mu, &config, &f)?;
            let mixed = error_norms(&disc, &sol.u, &sol.p, &problem, ERROR_QUADRATURE_DEGREE)?;
            let u = locking_baseline(&disc, &params, &f)?;
            let zero_p = vec![0.0; disc.dofs.n_p()];
            let base = error_norms(&disc, &u, &zero_p, &problem, ERROR_QUADRATURE_DEGREE)?;
            Ok(LockingRow {
                n,
                poisson: nu,
                lambda: params.lambda,
                mixed_l2_u: mixed.l2_u,
                baseline_l2_u: base.l2_u,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_structured_quads;

    #[test]
    fn tiny_lambda_matches_mixed_solution() {
        let disc = Discretization::new(generate_structured_quads(4, 4, 0.1, 2).unwrap()).unwrap();
        let params = MaterialParams::from_lame(1e-10, 0.4).unwrap();
        let f = |x: Point2| [1.0 + x.x, x.y * x.y];
        let base = locking_baseline(&disc, &params, &f).unwrap();
        let (_, sol) = solve_mixed(&disc, params.lambda, params.mu, &SolverConfig::default(), &f).unwrap();
        let scale = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in base.iter().zip(&sol.u) {
            assert!((a - b).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn baseline_locks_for_nearly_incompressible_material() {
        let rows = locking_study(&MeshFamily::Triangles, 8, 1.0, &[0.3, 0.4999]).unwrap();
        assert!(rows[0].ratio() < 3.0);
        assert!(rows[1].ratio() > rows[0].ratio());
    }
}
