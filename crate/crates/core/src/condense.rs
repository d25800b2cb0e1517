//! Elimination of the interior dual-center displacements (grad form).
//!
//! The hat function of a dual center is supported in its own volume, and in
//! the grad form the two components decouple, so the dual-center block of A
//! is diagonal and the Schur complement can be formed entry by entry.

use crate::assembly::{triangle_gradients, Form, SaddleSystem};
use crate::discretization::Discretization;
use crate::error::{FeccError, Result};
use crate::mesh::{DualMesh, ThirdMesh};
use crate::solve::{finish, solve_blocks, SaddleBlocks, Solution, SolveOptions};
use crate::spaces::DofMap;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// `int_M |grad N_{C_M}|^2` for every interior dual volume, in dual-center unknown order.
pub fn compute_theta(dual: &DualMesh, third: &ThirdMesh, dofs: &DofMap) -> Result<Vec<f64>> {
    let mut theta = vec![0.0; dofs.n_center()];
    for (m, volume) in dual.volumes().iter().enumerate() {
        if volume.is_boundary {
            continue;
        }
        let center = volume.vertex;
        let Some(s) = dofs.scalar_dof(center) else { continue };
        let j = s - dofs.n_cell();
        for t in third.owned_triangles(m) {
            let (area, g) = triangle_gradients(third, t)?;
            let local = third.triangles()[t]
                .iter()
                .position(|&node| node == center)
                .expect("owned triangle contains the center");
            theta[j] += area * g[local].dot(g[local]);
        }
    }
    Ok(theta)
}

/// Couplings of each eliminated unknown, read off the assembled system.
#[derive(Debug, Clone)]
pub struct CondensationData {
    pub theta: Vec<f64>,
    /// Diagonal of A on the eliminated unknowns (`mu * theta` per component).
    pub diag: Vec<f64>,
    /// Global displacement index of each eliminated unknown.
    pub eliminated: Vec<usize>,
    /// Row of A for each eliminated unknown, restricted to kept unknowns (reduced numbering).
    pub a_rows: Vec<Vec<(usize, f64)>>,
    /// Column of B for each eliminated unknown: `(volume, int_M d_k N_{C_M})`.
    pub b_cols: Vec<Vec<(usize, f64)>>,
    /// Load entry of each eliminated unknown.
    pub loads: Vec<f64>,
}

fn reduced_index(dofs: &DofMap, global: usize) -> Option<usize> {
    let ns = dofs.n_scalar();
    let (comp, s) = (global / ns, global % ns);
    (s < dofs.n_cell()).then(|| comp * dofs.n_cell() + s)
}

fn kept_global(dofs: &DofMap, reduced: usize) -> usize {
    let nc = dofs.n_cell();
    (reduced / nc) * dofs.n_scalar() + reduced % nc
}

impl CondensationData {
    pub fn new(system: &SaddleSystem, disc: &Discretization) -> Result<Self> {
        if system.form != Form::Grad {
            return Err(FeccError::CondensationUnsupported);
        }
        let dofs = &disc.dofs;
        let theta = compute_theta(&disc.dual, &disc.third, dofs)?;
        let (ns, nc) = (dofs.n_scalar(), dofs.n_cell());
        let eliminated: Vec<usize> = (0..2)
            .flat_map(|comp| (nc..ns).map(move |s| comp * ns + s))
            .collect();
        let position = |global: usize| -> Option<usize> {
            let (comp, s) = (global / ns, global % ns);
            (s >= nc).then(|| comp * (ns - nc) + (s - nc))
        };

        let mut diag = vec![0.0; eliminated.len()];
        let mut a_rows = vec![Vec::new(); eliminated.len()];
        for (q, &row) in eliminated.iter().enumerate() {
            for (col, v) in system.a.row(row) {
                if col == row {
                    diag[q] = v;
                } else if let Some(k) = reduced_index(dofs, col) {
                    a_rows[q].push((k, v));
                } else if v != 0.0 {
                    // Another eliminated unknown: the block is not diagonal.
                    return Err(FeccError::CondensationUnsupported);
                }
            }
            if !(diag[q] > 0.0) {
                return Err(FeccError::FactorizationBreakdown {
                    pivot: row,
                    reason: "non-positive dual-center diagonal".into(),
                });
            }
        }
        let mut b_cols = vec![Vec::new(); eliminated.len()];
        for (m, col, v) in system.b.triplets() {
            if let Some(q) = position(col) {
                b_cols[q].push((m, v));
            }
        }
        let loads = eliminated.iter().map(|&g| system.f[g]).collect();
        Ok(Self {
            theta,
            diag,
            eliminated,
            a_rows,
            b_cols,
            loads,
        })
    }
}

/// The cell-point system left after elimination, in the variable `kappa p`:
/// `[[A~, B~^T], [B~, -(C/(kappa lambda) + E)]] [U_K; kappa P] = [F~; g]`.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub e: CsrMatrix,
    pub c: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub kappa: f64,
    pub data: CondensationData,
}

pub fn condense(system: &SaddleSystem, dofs: &DofMap, data: CondensationData) -> Result<CondensedSystem> {
    if system.form != Form::Grad {
        return Err(FeccError::CondensationUnsupported);
    }
    let nk = 2 * dofs.n_cell();
    let np = system.n_p();

    let mut a = TripletBuilder::new(nk, nk);
    for (r, c, v) in system.a.triplets() {
        if let (Some(i), Some(j)) = (reduced_index(dofs, r), reduced_index(dofs, c)) {
            a.push(i, j, v);
        }
    }
    let mut b = TripletBuilder::new(np, nk);
    for (m, c, v) in system.b.triplets() {
        if let Some(j) = reduced_index(dofs, c) {
            b.push(m, j, v);
        }
    }
    let mut e = TripletBuilder::new(np, np);
    let mut f: Vec<f64> = (0..nk).map(|k| system.f[kept_global(dofs, k)]).collect();
    let mut g = vec![0.0; np];

    for q in 0..data.eliminated.len() {
        let d = data.diag[q];
        let row = &data.a_rows[q];
        let col = &data.b_cols[q];
        let load = data.loads[q];
        for &(i, ai) in row {
            for &(j, aj) in row {
                a.push(i, j, -ai * aj / d);
            }
            f[i] -= ai * load / d;
        }
        for &(m, bm) in col {
            for &(j, aj) in row {
                b.push(m, j, -bm * aj / d);
            }
            for &(n, bn) in col {
                e.push(m, n, bm * bn / d);
            }
            g[m] -= bm * load / d;
        }
    }
    Ok(CondensedSystem {
        a: a.build(),
        b: b.build(),
        e: e.build(),
        c: system.c.clone(),
        f,
        g,
        kappa: system.kappa,
        data,
    })
}

impl CondensedSystem {
    pub fn n_u(&self) -> usize {
        self.a.nrows()
    }

    pub fn blocks(&self, lambda: f64) -> SaddleBlocks {
        let scale = 1.0 / (self.kappa * lambda);
        let mut d = TripletBuilder::new(self.c.len(), self.c.len());
        for (i, &c) in self.c.iter().enumerate() {
            d.push(i, i, c * scale);
        }
        for (r, c, v) in self.e.triplets() {
            d.push(r, c, v);
        }
        SaddleBlocks {
            a: self.a.clone(),
            b: self.b.clone(),
            d: d.build(),
            f: self.f.clone(),
            g: self.g.clone(),
            precond: self.c.clone(),
        }
    }
}

/// Recovers the full displacement vector from cell-point values and pressures.
pub fn reconstruct(dofs: &DofMap, u_cells: &[f64], p: &[f64], data: &CondensationData, kappa: f64) -> Vec<f64> {
    let mut u = vec![0.0; dofs.n_u()];
    for (k, &v) in u_cells.iter().enumerate() {
        u[kept_global(dofs, k)] = v;
    }
    for (q, &global) in data.eliminated.iter().enumerate() {
        let coupling: f64 = data.a_rows[q].iter().map(|&(k, a)| a * u_cells[k]).sum();
        let pressure: f64 = data.b_cols[q].iter().map(|&(m, b)| b * p[m]).sum();
        u[global] = (data.loads[q] - coupling - kappa * pressure) / data.diag[q];
    }
    u
}

/// Condensed solve followed by reconstruction; the residual is that of the full system.
pub fn solve_condensed(
    system: &SaddleSystem,
    disc: &Discretization,
    lambda: f64,
    opts: &SolveOptions,
) -> Result<Solution> {
    // Validates lambda before any work.
    SaddleBlocks::from_system(system, lambda)?;
    let data = CondensationData::new(system, disc)?;
    let condensed = condense(system, &disc.dofs, data)?;
    let out = solve_blocks(&condensed.blocks(lambda), opts)?;
    let p: Vec<f64> = out.y.iter().map(|v| v / system.kappa).collect();
    let u = reconstruct(&disc.dofs, &out.x, &p, &condensed.data, system.kappa);
    finish(system, lambda, u, p, out.iterations, out.converged, opts.tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_quads, generate_structured_triangles, PrimalMesh};
    use crate::solve::{solve_saddle, SolveMethod};
    use nalgebra::{DMatrix, DVector};

    fn setup(mesh: PrimalMesh, mu: f64, form: Form) -> (Discretization, SaddleSystem) {
        let disc = Discretization::new(mesh).unwrap();
        let sys = SaddleSystem::assemble(&disc, mu, form, &|x| [1.0 + x.y, x.x * x.x]).unwrap();
        (disc, sys)
    }

    fn dense_full(system: &SaddleSystem, lambda: f64) -> DVector<f64> {
        let (n, m) = (system.n_u(), system.n_p());
        let b = system.b.to_dense();
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&system.a.to_dense());
        k.view_mut((n, 0), (m, n)).copy_from(&b);
        k.view_mut((0, n), (n, m)).copy_from(&(b.transpose() * system.kappa));
        for i in 0..m {
            k[(n + i, n + i)] = -system.c[i] / lambda;
        }
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from_slice(&system.f);
        k.lu().solve(&rhs).unwrap()
    }

    fn rel(a: &[f64], b: &[f64]) -> f64 {
        let num = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        num / b.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn theta_of_square_interior_volume() {
        let (disc, _) = setup(generate_structured_quads(2, 2, 0.0, 0).unwrap(), 1.0, Form::Grad);
        let theta = compute_theta(&disc.dual, &disc.third, &disc.dofs).unwrap();
        assert_eq!(theta.len(), 1);
        assert!((theta[0] - 4.0).abs() < 1e-13);
    }

    #[test]
    fn theta_matches_stiffness_diagonal_and_is_scale_invariant() {
        let mesh = generate_structured_quads(4, 4, 0.2, 7).unwrap();
        let (disc, sys) = setup(mesh.clone(), 0.7, Form::Grad);
        let theta = compute_theta(&disc.dual, &disc.third, &disc.dofs).unwrap();
        let data = CondensationData::new(&sys, &disc).unwrap();
        for (q, &d) in data.diag.iter().enumerate() {
            assert!((d / 0.7 - theta[q % theta.len()]).abs() < 1e-12);
        }
        let scaled: Vec<_> = mesh.vertices().iter().map(|&p| 3.0 * p).collect();
        let big = Discretization::new(PrimalMesh::new(scaled, mesh.cells().to_vec(), None).unwrap()).unwrap();
        let theta_big = compute_theta(&big.dual, &big.third, &big.dofs).unwrap();
        for (a, b) in theta.iter().zip(&theta_big) {
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn toy_schur_step() {
        // One kept pair of unknowns coupled to a single eliminated one.
        let (c1, c2, d) = (0.3, -0.7, 2.0);
        let mut reduced = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 5.0]);
        let full = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, c1, 1.0, 5.0, c2, c1, c2, d]);
        let c = [c1, c2];
        for i in 0..2 {
            for j in 0..2 {
                reduced[(i, j)] -= c[i] * c[j] / d;
            }
        }
        let schur = full.view((0, 0), (2, 2)) - full.view((0, 2), (2, 1)) * full.view((2, 0), (1, 2)) / d;
        assert!((reduced - schur).abs().max() < 1e-15);
    }

    #[test]
    fn refuses_eps_form() {
        let (disc, sys) = setup(generate_structured_quads(2, 2, 0.0, 0).unwrap(), 0.4, Form::Eps);
        assert!(matches!(
            CondensationData::new(&sys, &disc),
            Err(FeccError::CondensationUnsupported)
        ));
    }

    #[test]
    fn no_interior_centers_is_identity() {
        let (disc, sys) = setup(generate_structured_quads(1, 1, 0.0, 0).unwrap(), 0.4, Form::Grad);
        let data = CondensationData::new(&sys, &disc).unwrap();
        let cs = condense(&sys, &disc.dofs, data).unwrap();
        assert_eq!(cs.a, sys.a);
        assert_eq!(cs.b, sys.b);
        assert_eq!(cs.f, sys.f);
        assert_eq!(cs.e.nnz(), 0);
    }

    #[test]
    fn condensed_matches_dense_full_solve() {
        let meshes = [
            generate_structured_quads(2, 2, 0.0, 0).unwrap(),
            generate_structured_quads(5, 4, 0.25, 3).unwrap(),
            generate_structured_triangles(4, 4).unwrap(),
        ];
        for mesh in meshes {
            let (disc, sys) = setup(mesh, 0.4, Form::Grad);
            for lambda in [1.0, 1e3, 1e6] {
                let z = dense_full(&sys, lambda);
                let sol = solve_condensed(&sys, &disc, lambda, &SolveOptions::default()).unwrap();
                let n = sys.n_u();
                assert!(rel(&sol.u, &z.as_slice()[..n]) < 1e-10, "u at lambda {lambda}");
                assert!(rel(&sol.p, &z.as_slice()[n..]) < 1e-10, "p at lambda {lambda}");
                assert!(sol.residual < 1e-12);
            }
        }
    }

    #[test]
    fn reduced_counts_and_cell_sparsity() {
        let mesh = generate_structured_quads(4, 3, 0.0, 0).unwrap();
        let (disc, sys) = setup(mesh.clone(), 0.4, Form::Grad);
        let data = CondensationData::new(&sys, &disc).unwrap();
        let cs = condense(&sys, &disc.dofs, data).unwrap();
        assert_eq!(cs.n_u(), 2 * mesh.num_cells());
        assert_eq!(cs.b.nrows(), mesh.num_vertices());
        let nc = mesh.num_cells();
        for (r, c, _) in cs.a.triplets() {
            let (k1, k2) = (r % nc, c % nc);
            let shared = mesh.cells()[k1].iter().any(|v| mesh.cells()[k2].contains(v));
            assert!(shared, "cells {k1} and {k2} share no vertex");
        }
        assert!(cs.a.asymmetry() < 1e-14);
    }

    #[test]
    fn reconstruction_satisfies_center_equations() {
        let (disc, sys) = setup(generate_structured_quads(4, 4, 0.2, 1).unwrap(), 0.4, Form::Grad);
        let sol = solve_condensed(&sys, &disc, 10.0, &SolveOptions::default()).unwrap();
        let au = sys.a.mul_vec(&sol.u);
        let btp = sys.b.transpose_mul_vec(&sol.p);
        let data = CondensationData::new(&sys, &disc).unwrap();
        for &row in &data.eliminated {
            let r = sys.f[row] - au[row] - btp[row];
            assert!(r.abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn center_values_follow_explicit_local_formula() {
        // Per-component local formula built from third-mesh integrals:
        // u_C = (int f N_C - mu sum_K u_K int grad N_K . grad N_C - kappa int d_k N_C p_M) / (mu Theta).
        let mu = 0.4;
        let kappa = mu + 1.0;
        let (disc, sys) = setup(generate_structured_quads(3, 3, 0.15, 5).unwrap(), mu, Form::Grad);
        let sys = sys.with_kappa(kappa).unwrap();
        let sol = solve_condensed(&sys, &disc, 5.0, &SolveOptions::default()).unwrap();
        let theta = compute_theta(&disc.dual, &disc.third, &disc.dofs).unwrap();
        let loads = crate::assembly::node_load_integrals(&disc.third, &|x| [1.0 + x.y, x.x * x.x]).unwrap();
        let dofs = &disc.dofs;
        for (m, volume) in disc.dual.volumes().iter().enumerate() {
            let Some(s) = dofs.scalar_dof(volume.vertex) else { continue };
            let j = s - dofs.n_cell();
            for comp in 0..2 {
                let mut coupling = 0.0;
                let mut div = 0.0;
                for t in disc.third.owned_triangles(m) {
                    let tri = disc.third.triangles()[t];
                    let (area, g) = triangle_gradients(&disc.third, t).unwrap();
                    div += area * if comp == 0 { g[0].x } else { g[0].y };
                    for a in 1..3 {
                        if let Some(idx) = dofs.u_index(tri[a], comp) {
                            coupling += mu * area * g[a].dot(g[0]) * sol.u[idx];
                        }
                    }
                }
                let expected = (loads[volume.vertex][comp] - coupling - kappa * div * sol.p[m]) / (mu * theta[j]);
                let got = sol.u[dofs.u_index(volume.vertex, comp).unwrap()];
                assert!((got - expected).abs() < 1e-12 * (1.0 + expected.abs()));
            }
        }
    }

    #[test]
    fn zero_load_reconstructs_zero() {
        let disc = Discretization::new(generate_structured_quads(3, 3, 0.0, 0).unwrap()).unwrap();
        let sys = SaddleSystem::assemble(&disc, 0.4, Form::Grad, &|_| [0.0, 0.0]).unwrap();
        let sol = solve_condensed(&sys, &disc, 1e3, &SolveOptions::default()).unwrap();
        assert!(sol.u.iter().chain(&sol.p).all(|&v| v == 0.0));
    }

    #[test]
    fn uzawa_on_condensed_system_agrees() {
        let (disc, sys) = setup(generate_structured_triangles(4, 4).unwrap(), 0.4, Form::Grad);
        let direct = solve_condensed(&sys, &disc, 1e3, &SolveOptions::default()).unwrap();
        let opts = SolveOptions { method: SolveMethod::Uzawa, ..Default::default() };
        let uz = solve_condensed(&sys, &disc, 1e3, &opts).unwrap();
        let full = solve_saddle(&sys, 1e3, &opts).unwrap();
        assert!(rel(&uz.u, &direct.u) < 1e-11);
        assert!(rel(&full.u, &direct.u) < 1e-11);
    }
}
