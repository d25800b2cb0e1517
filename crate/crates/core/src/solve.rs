//! Solvers for the symmetric indefinite block system.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::{LltError, LuError};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::assembly::SaddleSystem;
use crate::error::{FeccError, Result};
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Sparse LU of the whole block matrix.
    Direct,
    /// Conjugate gradients on the pressure Schur complement.
    Uzawa,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: SolveMethod,
    pub tolerance: f64,
    /// Defaults to ten times the system size when `None`.
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::Direct,
            tolerance: 1e-12,
            max_iterations: None,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(FeccError::InvalidArgument(format!(
                "tolerance must lie in (0, 1) (got {})",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    /// Normwise backward error of the original block system.
    pub residual: f64,
    /// `sum_M area(M) p_M`
    pub pressure_mean: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `[[A, B^T], [B, -D]] [x; y] = [f; g]` with `A` SPD and `D` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct SaddleBlocks {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub d: CsrMatrix,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// Positive diagonal used to precondition the pressure iteration.
    pub precond: Vec<f64>,
}

/// Raw result of a block solve.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn diagonal_matrix(d: &[f64]) -> CsrMatrix {
    let mut t = TripletBuilder::new(d.len(), d.len());
    for (i, &v) in d.iter().enumerate() {
        t.push(i, i, v);
    }
    t.build()
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `||r|| / (||K|| ||x|| + ||b||)` in the infinity norm; zero when `r = 0`.
pub fn backward_error(residual: &[f64], k_norm: f64, x_norm: f64, b_norm: f64) -> f64 {
    let r = inf_norm(residual);
    if r == 0.0 {
        return 0.0;
    }
    r / (k_norm * x_norm + b_norm)
}

impl SaddleBlocks {
    /// Symmetric form of `[[A, kappa B^T], [B, -C/lambda]]`, in the variable `kappa p`.
    pub fn from_system(system: &SaddleSystem, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let scale = 1.0 / (system.kappa * lambda);
        let d: Vec<f64> = system.c.iter().map(|c| c * scale).collect();
        Ok(Self {
            a: system.a.clone(),
            b: system.b.clone(),
            d: diagonal_matrix(&d),
            f: system.f.clone(),
            g: vec![0.0; system.n_p()],
            precond: system.c.clone(),
        })
    }

    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_y(&self) -> usize {
        self.b.nrows()
    }

    fn check_shapes(&self) -> Result<()> {
        let (n, m) = (self.n_x(), self.n_y());
        let ok = self.a.ncols() == n
            && self.b.ncols() == n
            && self.d.nrows() == m
            && self.d.ncols() == m
            && self.f.len() == n
            && self.g.len() == m
            && self.precond.len() == m;
        if ok {
            Ok(())
        } else {
            Err(FeccError::InvalidArgument(
                "inconsistent block dimensions".into(),
            ))
        }
    }

    pub fn full_matrix(&self) -> CsrMatrix {
        let n = self.n_x();
        let size = n + self.n_y();
        let mut t = TripletBuilder::new(size, size);
        for (r, c, v) in self.a.triplets() {
            t.push(r, c, v);
        }
        for (r, c, v) in self.b.triplets() {
            t.push(n + r, c, v);
            t.push(c, n + r, v);
        }
        for (r, c, v) in self.d.triplets() {
            t.push(n + r, n + c, -v);
        }
        t.build()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.f.iter().chain(self.g.iter()).copied().collect()
    }

    /// Block residual `rhs - K [x; y]`.
    pub fn residual(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let ax = self.a.mul_vec(x);
        let bty = self.b.transpose_mul_vec(y);
        let bx = self.b.mul_vec(x);
        let dy = self.d.mul_vec(y);
        let mut r: Vec<f64> = (0..self.n_x())
            .map(|i| self.f[i] - ax[i] - bty[i])
            .collect();
        r.extend((0..self.n_y()).map(|i| self.g[i] - bx[i] + dy[i]));
        r
    }

    pub fn backward_error(&self, x: &[f64], y: &[f64]) -> f64 {
        let r = self.residual(x, y);
        let k_norm = self.full_matrix().norm_inf();
        let xy: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
        backward_error(&r, k_norm, inf_norm(&xy), inf_norm(&self.rhs()))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(FeccError::InvalidArgument(format!(
            "lambda must be positive and finite (got {lambda})"
        )))
    }
}

pub(crate) fn to_faer(m: &CsrMatrix) -> Result<SparseColMat<usize, f64>> {
    let triplets: Vec<Triplet<usize, usize, f64>> = m
        .triplets()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    SparseColMat::try_new_from_triplets(m.nrows(), m.ncols(), &triplets)
        .map_err(|e| FeccError::InvalidArgument(format!("sparse matrix construction: {e:?}")))
}

fn lu_error(e: LuError) -> FeccError {
    match e {
        LuError::SymbolicSingular { index } => FeccError::FactorizationBreakdown {
            pivot: index,
            reason: "structurally singular".into(),
        },
        LuError::Generic(g) => FeccError::FactorizationBreakdown {
            pivot: 0,
            reason: format!("{g:?}"),
        },
    }
}

fn llt_error(e: LltError) -> FeccError {
    match e {
        LltError::Numeric(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot {
            index,
        }) => FeccError::FactorizationBreakdown {
            pivot: index,
            reason: "non-positive pivot in Cholesky factorization".into(),
        },
        LltError::Generic(g) => FeccError::FactorizationBreakdown {
            pivot: 0,
            reason: format!("{g:?}"),
        },
    }
}

fn first_non_finite(v: &[f64]) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

const REFINEMENT_STEPS: usize = 4;

fn solve_direct(blocks: &SaddleBlocks, tolerance: f64) -> Result<BlockSolution> {
    let k = blocks.full_matrix();
    let n = k.nrows();
    let rhs = blocks.rhs();
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(BlockSolution {
            x: vec![0.0; blocks.n_x()],
            y: vec![0.0; blocks.n_y()],
            iterations: 0,
            converged: true,
        });
    }
    let lu = to_faer(&k)?.sp_lu().map_err(lu_error)?;
    let solve = |b: &[f64]| -> Vec<f64> {
        let mut m = Mat::from_fn(n, 1, |i, _| b[i]);
        lu.solve_in_place(m.as_mut());
        (0..n).map(|i| m[(i, 0)]).collect()
    };
    let mut z = solve(&rhs);
    if let Some(pivot) = first_non_finite(&z) {
        return Err(FeccError::FactorizationBreakdown {
            pivot,
            reason: "numerically singular (non-finite solution)".into(),
        });
    }
    let k_norm = k.norm_inf();
    let b_norm = inf_norm(&rhs);
    // Refinement with compensated residuals drives the forward error toward
    // working precision, which matters for the pressure directions that B^T
    // annihilates (their error is amplified by lambda).
    let mut steps = 0;
    let mut r = k.residual_compensated(&z, &rhs);
    while steps < REFINEMENT_STEPS {
        let dz = solve(&r);
        if first_non_finite(&dz).is_some() {
            break;
        }
        for (a, b) in z.iter_mut().zip(&dz) {
            *a += b;
        }
        steps += 1;
        r = k.residual_compensated(&z, &rhs);
        if inf_norm(&dz) <= 2.0 * f64::EPSILON * inf_norm(&z) {
            break;
        }
    }
    let err = backward_error(&r, k_norm, inf_norm(&z), b_norm);
    let y = z.split_off(blocks.n_x());
    Ok(BlockSolution {
        x: z,
        y,
        iterations: steps,
        converged: err <= tolerance,
    })
}

fn solve_uzawa(
    blocks: &SaddleBlocks,
    tolerance: f64,
    max_iterations: usize,
) -> Result<BlockSolution> {
    let n = blocks.n_x();
    let m = blocks.n_y();
    let llt = to_faer(&blocks.a)?
        .sp_cholesky(Side::Lower)
        .map_err(llt_error)?;
    let a_solve = |b: &[f64]| -> Vec<f64> {
        let mut v = Mat::from_fn(n, 1, |i, _| b[i]);
        llt.solve_in_place(v.as_mut());
        (0..n).map(|i| v[(i, 0)]).collect()
    };
    let schur = |y: &[f64]| -> Vec<f64> {
        let w = a_solve(&blocks.b.transpose_mul_vec(y));
        let bw = blocks.b.mul_vec(&w);
        let dy = blocks.d.mul_vec(y);
        bw.iter().zip(&dy).map(|(a, b)| a + b).collect()
    };
    let a_inv_f = a_solve(&blocks.f);
    let rhs: Vec<f64> = blocks
        .b
        .mul_vec(&a_inv_f)
        .iter()
        .zip(&blocks.g)
        .map(|(a, g)| a - g)
        .collect();

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let rhs_norm = dot(&rhs, &rhs).sqrt();
    let mut y = vec![0.0; m];
    let mut iterations = 0;
    let mut cg_converged = rhs_norm == 0.0;
    if !cg_converged {
        let mut r = rhs.clone();
        let mut z: Vec<f64> = r.iter().zip(&blocks.precond).map(|(r, c)| r / c).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while iterations < max_iterations {
            let sp = schur(&p);
            let alpha = rz / dot(&p, &sp);
            if !alpha.is_finite() {
                break;
            }
            for i in 0..m {
                y[i] += alpha * p[i];
                r[i] -= alpha * sp[i];
            }
            iterations += 1;
            // One order of margin below the target keeps the backward error under it.
            if dot(&r, &r).sqrt() <= 0.1 * tolerance * rhs_norm {
                cg_converged = true;
                break;
            }
            z = r.iter().zip(&blocks.precond).map(|(r, c)| r / c).collect();
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..m {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
    let bty = blocks.b.transpose_mul_vec(&y);
    let shifted: Vec<f64> = blocks.f.iter().zip(&bty).map(|(f, b)| f - b).collect();
    let x = a_solve(&shifted);
    let converged = cg_converged && blocks.backward_error(&x, &y) <= tolerance;
    Ok(BlockSolution {
        x,
        y,
        iterations,
        converged,
    })
}

/// Solves the generic block system. Non-convergence is reported through `converged`.
pub fn solve_blocks(blocks: &SaddleBlocks, opts: &SolveOptions) -> Result<BlockSolution> {
    opts.validate()?;
    blocks.check_shapes()?;
    if let Some(i) = first_non_finite(&blocks.rhs()) {
        return Err(FeccError::NonFinite(format!("right-hand side entry {i}")));
    }
    let size = blocks.n_x() + blocks.n_y();
    match opts.method {
        SolveMethod::Direct => solve_direct(blocks, opts.tolerance),
        SolveMethod::Uzawa => solve_uzawa(
            blocks,
            opts.tolerance,
            opts.max_iterations.unwrap_or(10 * size),
        ),
    }
}

/// Backward error of `[[A, kappa B^T], [B, -C/lambda]] [U; P] = [F; 0]`,
/// evaluated directly from the assembled blocks.
pub fn residual_check(system: &SaddleSystem, lambda: f64, u: &[f64], p: &[f64]) -> f64 {
    let kappa = system.kappa;
    let au = system.a.mul_vec(u);
    let btp = system.b.transpose_mul_vec(p);
    let bu = system.b.mul_vec(u);
    let mut r: Vec<f64> = (0..u.len())
        .map(|i| system.f[i] - au[i] - kappa * btp[i])
        .collect();
    r.extend((0..p.len()).map(|m| -bu[m] + system.c[m] * p[m] / lambda));

    let a_rows = system.a.row_abs_sums();
    let b_rows = system.b.row_abs_sums();
    let mut bt_rows = vec![0.0; system.n_u()];
    for (_, c, v) in system.b.triplets() {
        bt_rows[c] += v.abs();
    }
    let top = (0..system.n_u())
        .map(|i| a_rows[i] + kappa * bt_rows[i])
        .fold(0.0, f64::max);
    let bottom = (0..system.n_p())
        .map(|m| b_rows[m] + system.c[m] / lambda)
        .fold(0.0, f64::max);
    let x_norm = inf_norm(u).max(inf_norm(p));
    backward_error(&r, top.max(bottom), x_norm, inf_norm(&system.f))
}

pub(crate) fn pressure_mean(c: &[f64], p: &[f64]) -> f64 {
    c.iter().zip(p).map(|(c, p)| c * p).sum()
}

/// Packages a solved pair, turning failed convergence into an error carrying the iterate.
pub(crate) fn finish(
    system: &SaddleSystem,
    lambda: f64,
    u: Vec<f64>,
    p: Vec<f64>,
    iterations: usize,
    converged: bool,
    tolerance: f64,
) -> Result<Solution> {
    let residual = residual_check(system, lambda, &u, &p);
    let converged = converged && residual <= tolerance;
    let solution = Solution {
        pressure_mean: pressure_mean(&system.c, &p),
        u,
        p,
        residual,
        iterations,
        converged,
    };
    if converged {
        Ok(solution)
    } else {
        Err(FeccError::NotConverged {
            iterations,
            residual,
            best: Box::new(solution),
        })
    }
}

/// Solves the uncondensed mixed system for `(U, P)`.
pub fn solve_saddle(system: &SaddleSystem, lambda: f64, opts: &SolveOptions) -> Result<Solution> {
    let blocks = SaddleBlocks::from_system(system, lambda)?;
    let out = solve_blocks(&blocks, opts)?;
    let p = out.y.iter().map(|v| v / system.kappa).collect();
    finish(
        system,
        lambda,
        out.x,
        p,
        out.iterations,
        out.converged,
        opts.tolerance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Form;
    use crate::discretization::Discretization;
    use crate::mesh::generate_structured_quads;
    use nalgebra::{DMatrix, DVector};

    fn system(n: usize, form: Form, mu: f64) -> SaddleSystem {
        let disc = Discretization::new(generate_structured_quads(n, n, 0.0, 0).unwrap()).unwrap();
        SaddleSystem::assemble(&disc, mu, form, &|_| [1.0, 0.0]).unwrap()
    }

    fn dense_oracle(system: &SaddleSystem, lambda: f64) -> DVector<f64> {
        let (n, m) = (system.n_u(), system.n_p());
        let a = system.a.to_dense();
        let b = system.b.to_dense();
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&a);
        k.view_mut((n, 0), (m, n)).copy_from(&b);
        k.view_mut((0, n), (n, m)).copy_from(&(b.transpose() * system.kappa));
        for i in 0..m {
            k[(n + i, n + i)] = -system.c[i] / lambda;
        }
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from_slice(&system.f);
        k.lu().solve(&rhs).unwrap()
    }

    fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        inf_norm(&d) / inf_norm(b).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_load_gives_exact_zero() {
        let mut s = system(3, Form::Eps, 0.4);
        s.f.iter_mut().for_each(|v| *v = 0.0);
        for method in [SolveMethod::Direct, SolveMethod::Uzawa] {
            let opts = SolveOptions { method, ..Default::default() };
            let sol = solve_saddle(&s, 0.4, &opts).unwrap();
            assert!(sol.u.iter().chain(&sol.p).all(|&v| v == 0.0));
            assert_eq!(sol.residual, 0.0);
        }
    }

    #[test]
    fn matches_dense_oracle_on_2x2() {
        let s = system(2, Form::Eps, 0.4);
        let sol = solve_saddle(&s, 0.4, &SolveOptions::default()).unwrap();
        let z = dense_oracle(&s, 0.4);
        let n = s.n_u();
        let ours: Vec<f64> = sol.u.iter().chain(&sol.p).copied().collect();
        assert!(rel_diff(&ours, z.as_slice()) < 1e-12);
        assert!(sol.residual < 1e-12);
        assert_eq!(ours.len(), n + s.n_p());
    }

    #[test]
    fn kappa_variant_matches_dense_oracle() {
        let s = system(3, Form::Grad, 0.4).with_kappa(1.4).unwrap();
        let sol = solve_saddle(&s, 2.0, &SolveOptions::default()).unwrap();
        let z = dense_oracle(&s, 2.0);
        let ours: Vec<f64> = sol.u.iter().chain(&sol.p).copied().collect();
        assert!(rel_diff(&ours, z.as_slice()) < 1e-11);
    }

    #[test]
    fn pressure_mean_vanishes_for_large_lambda() {
        let s = system(2, Form::Eps, 0.4);
        let sol = solve_saddle(&s, 1e6, &SolveOptions::default()).unwrap();
        let area: f64 = s.c.iter().sum();
        assert!(sol.pressure_mean.abs() / (area * inf_norm(&sol.p)) < 1e-9);
    }

    #[test]
    fn direct_and_uzawa_agree() {
        for form in [Form::Eps, Form::Grad] {
            let s = system(4, form, 0.4);
            for lambda in [1.0, 1e3, 1e6] {
                let d = solve_saddle(&s, lambda, &SolveOptions::default()).unwrap();
                let opts = SolveOptions { method: SolveMethod::Uzawa, ..Default::default() };
                let u = solve_saddle(&s, lambda, &opts).unwrap();
                assert!(rel_diff(&u.u, &d.u) < 1e-11, "{form} {lambda}");
            }
        }
    }

    #[test]
    fn perturbed_solution_raises_residual() {
        let s = system(3, Form::Eps, 0.4);
        let sol = solve_saddle(&s, 1.0, &SolveOptions::default()).unwrap();
        let mut u = sol.u.clone();
        u[0] += 1e-3;
        let r = residual_check(&s, 1.0, &u, &sol.p);
        assert!(r > 1e-6, "{r}");
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let s = system(4, Form::Eps, 0.4);
        let opts = SolveOptions {
            method: SolveMethod::Uzawa,
            max_iterations: Some(1),
            ..Default::default()
        };
        match solve_saddle(&s, 1e3, &opts) {
            Err(FeccError::NotConverged { best, iterations, .. }) => {
                assert_eq!(iterations, 1);
                assert!(!best.converged);
                assert_eq!(best.u.len(), s.n_u());
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = system(2, Form::Eps, 0.4);
        assert!(solve_saddle(&s, 0.0, &SolveOptions::default()).is_err());
        assert!(solve_saddle(&s, f64::INFINITY, &SolveOptions::default()).is_err());
        let opts = SolveOptions { tolerance: 1.5, ..Default::default() };
        assert!(solve_saddle(&s, 1.0, &opts).is_err());
    }
}
