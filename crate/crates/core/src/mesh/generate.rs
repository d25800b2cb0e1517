use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PrimalMesh;
use crate::error::{FeccError, Result};
use crate::geometry::Point2;

/// Exclusive upper bound on the vertex perturbation, as a fraction of the grid spacing.
pub const MAX_PERTURB: f64 = 0.3;

fn check_counts(nx: usize, ny: usize) -> Result<()> {
    if nx == 0 || ny == 0 {
        return Err(FeccError::InvalidArgument(format!(
            "grid counts must be at least 1 (got {nx} x {ny})"
        )));
    }
    Ok(())
}

fn grid_vertices(nx: usize, ny: usize) -> Vec<Point2> {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point2::new(i as f64 / nx as f64, j as f64 / ny as f64));
        }
    }
    vertices
}

/// `nx` by `ny` quadrilaterals on the unit square. Interior vertices are
/// displaced by at most `perturb * h` (seeded), which keeps every cell convex
/// for `perturb < 0.3`.
pub fn generate_structured_quads(
    nx: usize,
    ny: usize,
    perturb: f64,
    seed: u64,
) -> Result<PrimalMesh> {
    check_counts(nx, ny)?;
    if !(0.0..MAX_PERTURB).contains(&perturb) {
        return Err(FeccError::InvalidArgument(format!(
            "perturb must lie in [0, {MAX_PERTURB}) (got {perturb})"
        )));
    }
    let mut vertices = grid_vertices(nx, ny);
    if perturb > 0.0 {
        let h = (1.0 / nx as f64).min(1.0 / ny as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for j in 1..ny {
            for i in 1..nx {
                let r = perturb * h * rng.random::<f64>();
                let theta = 2.0 * PI * rng.random::<f64>();
                let v = &mut vertices[j * (nx + 1) + i];
                v.x += r * theta.cos();
                v.y += r * theta.sin();
            }
        }
    }
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = j * (nx + 1) + i;
            cells.push(vec![a, a + 1, a + nx + 2, a + nx + 1]);
        }
    }
    PrimalMesh::new(vertices, cells, None)
}

/// Grid squares split along the (i, j)-(i+1, j+1) diagonal.
pub fn generate_structured_triangles(nx: usize, ny: usize) -> Result<PrimalMesh> {
    check_counts(nx, ny)?;
    let vertices = grid_vertices(nx, ny);
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = j * (nx + 1) + i;
            let (b, c, d) = (a + 1, a + nx + 2, a + nx + 1);
            cells.push(vec![a, b, c]);
            cells.push(vec![a, c, d]);
        }
    }
    PrimalMesh::new(vertices, cells, None)
}

/// Mesh families used by the studies and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshFamily {
    Quads,
    PerturbedQuads { perturb: f64, seed: u64 },
    Triangles,
}

impl MeshFamily {
    pub fn generate(&self, n: usize) -> Result<PrimalMesh> {
        match *self {
            MeshFamily::Quads => generate_structured_quads(n, n, 0.0, 0),
            MeshFamily::PerturbedQuads { perturb, seed } => {
                generate_structured_quads(n, n, perturb, seed)
            }
            MeshFamily::Triangles => generate_structured_triangles(n, n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Quads => "quads",
            MeshFamily::PerturbedQuads { .. } => "perturbed-quads",
            MeshFamily::Triangles => "triangles",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_primal;

    #[test]
    fn single_quad() {
        let m = generate_structured_quads(1, 1, 0.0, 0).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.cell_points()[0], Point2::new(0.5, 0.5));
    }

    #[test]
    fn two_by_two_quads_centroids() {
        let m = generate_structured_quads(2, 2, 0.0, 0).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert_eq!(m.num_vertices(), 9);
        let expected = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)];
        for (p, &(x, y)) in m.cell_points().iter().zip(&expected) {
            assert!((p.x - x).abs() < 1e-15 && (p.y - y).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbed_quads_stay_star_shaped() {
        let m = generate_structured_quads(4, 4, 0.2, 7).unwrap();
        let report = validate_primal(&m);
        assert!(report.is_ok(), "{:?}", report.failures);
        assert_ne!(m.vertices()[6], Point2::new(0.5, 0.25));
    }

    #[test]
    fn perturbation_is_deterministic() {
        let a = generate_structured_quads(5, 3, 0.25, 11).unwrap();
        let b = generate_structured_quads(5, 3, 0.25, 11).unwrap();
        let c = generate_structured_quads(5, 3, 0.25, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(generate_structured_quads(0, 2, 0.0, 0).is_err());
        assert!(generate_structured_quads(2, 2, 0.3, 0).is_err());
        assert!(generate_structured_quads(2, 2, -0.1, 0).is_err());
        assert!(generate_structured_triangles(3, 0).is_err());
    }

    #[test]
    fn triangle_areas() {
        let m = generate_structured_triangles(1, 1).unwrap();
        assert_eq!(m.num_cells(), 2);
        for k in 0..2 {
            assert!((crate::geometry::signed_area(&m.cell_polygon(k)) - 0.5).abs() < 1e-15);
        }
        let m = generate_structured_triangles(2, 2).unwrap();
        assert_eq!(m.num_cells(), 8);
        let total: f64 = (0..8)
            .map(|k| crate::geometry::signed_area(&m.cell_polygon(k)))
            .sum();
        assert!((total - 1.0).abs() < 1e-15);
        let m = generate_structured_triangles(8, 8).unwrap();
        assert_eq!(m.num_cells(), 128);
        assert!(validate_primal(&m).is_ok());
    }
}
