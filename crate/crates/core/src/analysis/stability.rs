//! Local and global stability constants of the discrete pair, by dense linear algebra.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use crate::assembly::{assemble_a, assemble_b, assemble_c, triangle_gradients, Form};
use crate::discretization::Discretization;
use crate::error::{FeccError, Result};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Relative singular-value cutoff for the local rank test.
const RANK_TOL: f64 = 1e-10;

/// Dimension of the space of piecewise constants on `groups` (lists of third-mesh
/// triangles) that annihilate the divergence of every displacement unknown at `nodes`.
pub fn local_nullspace_dim(disc: &Discretization, groups: &[Vec<usize>], nodes: &[usize]) -> Result<usize> {
    let cols: Vec<(usize, usize)> = nodes
        .iter()
        .filter(|&&n| disc.dofs.scalar_dof(n).is_some())
        .flat_map(|&n| [(n, 0), (n, 1)])
        .collect();
    if cols.is_empty() {
        return Ok(groups.len());
    }
    let mut g = DMatrix::<f64>::zeros(groups.len(), cols.len());
    let mut scale = 0.0f64;
    for (r, group) in groups.iter().enumerate() {
        for &t in group {
            let tri = disc.third.triangles()[t];
            let (area, grad) = triangle_gradients(&disc.third, t)?;
            for (c, &(node, k)) in cols.iter().enumerate() {
                if let Some(a) = tri.iter().position(|&v| v == node) {
                    let d = area * if k == 0 { grad[a].x } else { grad[a].y };
                    g[(r, c)] += d;
                    scale = scale.max(d.abs());
                }
            }
        }
    }
    let sv = g.singular_values();
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * scale).count();
    Ok(groups.len() - rank)
}

/// `dim N_M` for dual volume `m`: constants on M against the displacement unknowns
/// at nodes strictly inside M (only the dual center can be).
pub fn macroelement_nullspace_dim(disc: &Discretization, m: usize) -> Result<usize> {
    let triangles: Vec<usize> = disc.third.owned_triangles(m).collect();
    let center = disc.dual.volume(m).vertex;
    let inside = if disc.dual.volume(m).is_boundary { vec![] } else { vec![center] };
    local_nullspace_dim(disc, &[triangles], &inside)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSup {
    /// Square root of the smallest eigenvalue with constants removed.
    pub beta: f64,
    /// Smallest eigenvalue before removing constants (zero up to round-off).
    pub unfiltered_min: f64,
}

fn to_faer_dense(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues of a symmetric matrix, ascending.
fn dense_sym_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let values = to_faer_dense(&m)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| FeccError::Eigensolve(format!("{e:?}")))?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FeccError::Eigensolve("non-finite eigenvalue".into()));
    }
    Ok(values)
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
fn dense_sym_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let evd = to_faer_dense(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| FeccError::Eigensolve(format!("{e:?}")))?;
    let n = m.nrows();
    let values: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FeccError::Eigensolve("non-finite eigenvalue".into()));
    }
    let u = evd.U();
    Ok((values, DMatrix::from_fn(n, n, |i, j| u[(i, j)])))
}

/// Orthonormal basis of the complement of unit vector `v` (Householder reflection).
fn complement_basis(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    let mut w = v.clone();
    // Reflect v onto -sign(v0) e0 for stability.
    let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    w[0] += s;
    let wn = w.norm_squared();
    let mut h = DMatrix::<f64>::identity(n, n);
    if wn > 0.0 {
        h -= (2.0 / wn) * &w * w.transpose();
    }
    h.columns(1, n - 1).into_owned()
}

/// Discrete inf-sup constant: `beta^2` is the smallest eigenvalue of
/// `B A^-1 B^T q = theta C q` on pressures C-orthogonal to constants.
pub fn inf_sup_constant(a: &CsrMatrix, b: &CsrMatrix, c: &[f64]) -> Result<InfSup> {
    let a = a.to_dense();
    let b = b.to_dense();
    let chol = a
        .cholesky()
        .ok_or_else(|| FeccError::Eigensolve("displacement block is not positive definite".into()))?;
    let s = &b * chol.solve(&b.transpose());
    let m = c.len();
    let inv_sqrt: Vec<f64> = c.iter().map(|v| 1.0 / v.sqrt()).collect();
    let scaled = DMatrix::from_fn(m, m, |i, j| inv_sqrt[i] * s[(i, j)] * inv_sqrt[j]);
    let scaled = (&scaled + scaled.transpose()) * 0.5;
    let unfiltered_min = dense_sym_eigenvalues(scaled.clone())?[0];
    let ones = DVector::from_iterator(m, c.iter().map(|v| v.sqrt())).normalize();
    let q = complement_basis(&ones);
    let reduced = q.transpose() * &scaled * &q;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let theta = dense_sym_eigenvalues(reduced)?[0];
    Ok(InfSup {
        beta: theta.max(0.0).sqrt(),
        unfiltered_min,
    })
}

/// P1 mass and scalar stiffness (`grad . grad`) on the displacement unknowns.
fn h1_gram(disc: &Discretization) -> Result<CsrMatrix> {
    let n = disc.dofs.n_u();
    let mut t = TripletBuilder::new(n, n);
    let third = &disc.third;
    for (idx, tri) in third.triangles().iter().enumerate() {
        let (area, g) = triangle_gradients(third, idx)?;
        for a in 0..3 {
            for b in 0..3 {
                let mass = area / 12.0 * if a == b { 2.0 } else { 1.0 };
                let value = mass + area * g[a].dot(g[b]);
                for k in 0..2 {
                    if let (Some(i), Some(j)) = (disc.dofs.u_index(tri[a], k), disc.dofs.u_index(tri[b], k)) {
                        t.push(i, j, value);
                    }
                }
            }
        }
    }
    Ok(t.build())
}

/// `min a(v, v) / ||v||_1^2` over discretely divergence-free `v` (`B v = 0`),
/// with `a` the elastic form for modulus `mu`.
pub fn coercivity_constant(disc: &Discretization, mu: f64, form: Form) -> Result<f64> {
    let a = assemble_a(&disc.third, &disc.dofs, mu, form)?.to_dense();
    let b = assemble_b(&disc.third, &disc.dual, &disc.dofs)?.to_dense();
    let h = h1_gram(disc)?.to_dense();
    let btb = b.transpose() * &b;
    let btb = (&btb + btb.transpose()) * 0.5;
    let (values, vectors) = dense_sym_eigen(&btb)?;
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let kernel: Vec<usize> = (0..values.len()).filter(|&i| values[i].abs() <= 1e-10 * top).collect();
    if kernel.is_empty() {
        return Err(FeccError::Eigensolve("discrete kernel is trivial".into()));
    }
    let z = vectors.select_columns(&kernel);
    let hz = z.transpose() * &h * &z;
    let az = z.transpose() * &a * &z;
    let l = hz
        .cholesky()
        .ok_or_else(|| FeccError::Eigensolve("H1 Gram matrix is not positive definite".into()))?
        .l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| FeccError::Eigensolve("singular Cholesky factor".into()))?;
    let m = &linv * az * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    Ok(dense_sym_eigenvalues(m)?[0])
}

/// Inf-sup constant of the eps-form pair with `mu = 1/2`, so that `a(v, v) = int eps : eps`.
pub fn inf_sup_for(disc: &Discretization) -> Result<InfSup> {
    let a = assemble_a(&disc.third, &disc.dofs, 0.5, Form::Eps)?;
    let b = assemble_b(&disc.third, &disc.dual, &disc.dofs)?;
    let c = assemble_c(&disc.dual, &disc.dofs);
    inf_sup_constant(&a, &b, &c)
}
