//! Sparse assembly of the discrete mixed system.
//!
//! All bilinear forms act on P1 functions whose gradients are constant per
//! triangle, so one-point integration of A and B is exact. Loads use the
//! three-point edge-midpoint rule, exact for quadratics.

use std::fmt;

use crate::discretization::Discretization;
use crate::error::{FeccError, Result};
use crate::geometry::Point2;
use crate::mesh::{DualMesh, ThirdMesh};
use crate::spaces::{p1_gradients, DofMap};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Which elastic bilinear form goes into the displacement block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `2 mu (eps(u), eps(v))`
    Eps,
    /// `mu (grad u, grad v)`, decoupled between components.
    Grad,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Eps => "eps",
            Form::Grad => "grad",
        })
    }
}

impl std::str::FromStr for Form {
    type Err = FeccError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps" => Ok(Form::Eps),
            "grad" => Ok(Form::Grad),
            other => Err(FeccError::InvalidArgument(format!(
                "unknown form '{other}' (expected eps or grad)"
            ))),
        }
    }
}

pub(crate) fn triangle_gradients(third: &ThirdMesh, t: usize) -> Result<(f64, [Point2; 3])> {
    p1_gradients(third.triangle_points(t)).map_err(|e| match e {
        FeccError::DegenerateTriangle { area, tolerance, .. } => FeccError::DegenerateTriangle {
            index: t,
            area,
            tolerance,
        },
        other => other,
    })
}

fn component(g: Point2, k: usize) -> f64 {
    if k == 0 {
        g.x
    } else {
        g.y
    }
}

pub fn assemble_a(third: &ThirdMesh, dofs: &DofMap, mu: f64, form: Form) -> Result<CsrMatrix> {
    let n = dofs.n_u();
    let mut builder = TripletBuilder::new(n, n);
    for (t, tri) in third.triangles().iter().enumerate() {
        let (area, g) = triangle_gradients(third, t)?;
        for a in 0..3 {
            for i in 0..2 {
                let Some(row) = dofs.u_index(tri[a], i) else { continue };
                for b in 0..3 {
                    for j in 0..2 {
                        let Some(col) = dofs.u_index(tri[b], j) else { continue };
                        let value = match form {
                            Form::Grad if i != j => continue,
                            Form::Grad => mu * g[a].dot(g[b]),
                            Form::Eps => {
                                let diag = if i == j { g[a].dot(g[b]) } else { 0.0 };
                                mu * (diag + component(g[a], j) * component(g[b], i))
                            }
                        };
                        builder.push(row, col, area * value);
                    }
                }
            }
        }
    }
    Ok(builder.build())
}

/// Rows are dual volumes, columns displacement unknowns: `int_M d_k N_P`.
pub fn assemble_b(third: &ThirdMesh, dual: &DualMesh, dofs: &DofMap) -> Result<CsrMatrix> {
    let mut builder = TripletBuilder::new(dual.len(), dofs.n_u());
    for (t, tri) in third.triangles().iter().enumerate() {
        let (area, g) = triangle_gradients(third, t)?;
        let row = dofs.p_index(third.owner()[t]);
        for a in 0..3 {
            for k in 0..2 {
                if let Some(col) = dofs.u_index(tri[a], k) {
                    builder.push(row, col, area * component(g[a], k));
                }
            }
        }
    }
    Ok(builder.build())
}

/// Diagonal of the pressure mass matrix: `area(M)`.
pub fn assemble_c(dual: &DualMesh, dofs: &DofMap) -> Vec<f64> {
    let mut c = vec![0.0; dofs.n_p()];
    for (m, volume) in dual.volumes().iter().enumerate() {
        c[dofs.p_index(m)] = volume.area();
    }
    c
}

/// `int f N_P` for every third-mesh node, boundary nodes included.
pub fn node_load_integrals(
    third: &ThirdMesh,
    f: &dyn Fn(Point2) -> [f64; 2],
) -> Result<Vec<[f64; 2]>> {
    let mut out = vec![[0.0; 2]; third.num_nodes()];
    for (t, tri) in third.triangles().iter().enumerate() {
        let pts = third.triangle_points(t);
        let area = third.triangle_area(t);
        // Edge midpoint q lies on the edge (q, q+1); the hat of vertex a is 1/2 there
        // when a is an endpoint and 0 otherwise.
        for q in 0..3 {
            let mid = pts[q].midpoint(pts[(q + 1) % 3]);
            let value = f(mid);
            if !(value[0].is_finite() && value[1].is_finite()) {
                return Err(FeccError::NonFinite(format!(
                    "body force at ({}, {})",
                    mid.x, mid.y
                )));
            }
            for a in [q, (q + 1) % 3] {
                for k in 0..2 {
                    out[tri[a]][k] += area / 3.0 * 0.5 * value[k];
                }
            }
        }
    }
    Ok(out)
}

pub fn assemble_f(
    third: &ThirdMesh,
    dofs: &DofMap,
    f: &dyn Fn(Point2) -> [f64; 2],
) -> Result<Vec<f64>> {
    let per_node = node_load_integrals(third, f)?;
    let mut load = vec![0.0; dofs.n_u()];
    for (node, v) in per_node.iter().enumerate() {
        for (k, &value) in v.iter().enumerate() {
            if let Some(i) = dofs.u_index(node, k) {
                load[i] = value;
            }
        }
    }
    Ok(load)
}

/// `int div u div v` on the displacement unknowns (pure-displacement penalty term).
pub fn assemble_div_div(third: &ThirdMesh, dofs: &DofMap) -> Result<CsrMatrix> {
    let n = dofs.n_u();
    let mut builder = TripletBuilder::new(n, n);
    for (t, tri) in third.triangles().iter().enumerate() {
        let (area, g) = triangle_gradients(third, t)?;
        for a in 0..3 {
            for i in 0..2 {
                let Some(row) = dofs.u_index(tri[a], i) else { continue };
                for b in 0..3 {
                    for j in 0..2 {
                        let Some(col) = dofs.u_index(tri[b], j) else { continue };
                        builder.push(row, col, area * component(g[a], i) * component(g[b], j));
                    }
                }
            }
        }
    }
    Ok(builder.build())
}

/// The discrete mixed problem
/// `A U + kappa B^T P = F`, `B U - (1/lambda) C P = 0`.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub c: Vec<f64>,
    pub f: Vec<f64>,
    pub form: Form,
    /// Pressure coupling factor in the momentum equation (1 for the plain form).
    pub kappa: f64,
}

impl SaddleSystem {
    pub fn assemble(
        disc: &Discretization,
        mu: f64,
        form: Form,
        f: &dyn Fn(Point2) -> [f64; 2],
    ) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(FeccError::InvalidArgument(format!(
                "shear modulus must be positive (got {mu})"
            )));
        }
        Ok(Self {
            a: assemble_a(&disc.third, &disc.dofs, mu, form)?,
            b: assemble_b(&disc.third, &disc.dual, &disc.dofs)?,
            c: assemble_c(&disc.dual, &disc.dofs),
            f: assemble_f(&disc.third, &disc.dofs, f)?,
            form,
            kappa: 1.0,
        })
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(FeccError::InvalidArgument(format!(
                "kappa must be positive and finite (got {kappa})"
            )));
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn n_u(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_p(&self) -> usize {
        self.c.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_structured_quads;

    fn disc(n: usize) -> Discretization {
        Discretization::new(generate_structured_quads(n, n, 0.0, 0).unwrap()).unwrap()
    }

    #[test]
    fn grad_local_matrix_on_reference_triangle() {
        let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let (area, g) = p1_gradients(tri).unwrap();
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((area * g[a].dot(g[b]) - expected[a][b]).abs() < 1e-15);
            }
        }
        // x-derivative of the hat at the origin integrated over the triangle.
        assert!((area * g[0].x + 0.5).abs() < 1e-15);
    }

    #[test]
    fn grad_form_has_no_cross_component_entries() {
        let d = disc(3);
        let a = assemble_a(&d.third, &d.dofs, 0.7, Form::Grad).unwrap();
        let ns = d.dofs.n_scalar();
        for (r, c, _) in a.triplets() {
            assert_eq!(r / ns, c / ns);
        }
    }

    #[test]
    fn c_entries_are_volume_areas() {
        let d = disc(2);
        let c = assemble_c(&d.dual, &d.dofs);
        assert!((c[4] - 0.25).abs() < 1e-15);
        assert!((c[0] - 0.0625).abs() < 1e-15);
        assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pressure_constant_annihilates_divergence() {
        let d = disc(4);
        let b = assemble_b(&d.third, &d.dual, &d.dofs).unwrap();
        let ones = vec![1.0; b.nrows()];
        for s in b.transpose_mul_vec(&ones) {
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn zero_load() {
        let d = disc(2);
        let f = assemble_f(&d.third, &d.dofs, &|_| [0.0, 0.0]).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
        assert!(assemble_f(&d.third, &d.dofs, &|_| [f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn unit_load_partition_of_unity() {
        let d = disc(3);
        let per_node = node_load_integrals(&d.third, &|_| [1.0, 0.0]).unwrap();
        let total: f64 = per_node.iter().map(|v| v[0]).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(per_node.iter().all(|v| v[1] == 0.0));
    }
}
