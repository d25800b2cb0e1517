use std::f64::consts::PI;

use super::PrimalMesh;
use crate::geometry::{diameter, is_simple_polygon, orient, signed_area, winding_number, Point2};

/// Relative geometric degeneracy tolerance, scaled by the local squared mesh size.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Sample count per mesh-point segment in the joining-line check.
pub const JOINING_LINE_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationFailure {
    /// The polygon self-intersects.
    NonSimple { cell: usize },
    /// The mesh point does not see every boundary point of its cell.
    NotStarShaped { cell: usize, edge: usize },
    /// Vertex loop winds clockwise (or has no area).
    NotCounterclockwise { cell: usize, area: f64 },
    /// An undirected edge is used by more than two cells.
    EdgeMultiplicity { edge: (usize, usize), count: usize },
    /// Two cells traverse a shared edge in the same direction.
    InconsistentOrientation { edge: (usize, usize) },
    /// Cell areas do not add up to the area enclosed by the boundary.
    Coverage { cells_area: f64, domain_area: f64 },
    /// The segment between the mesh points of two neighbours leaves the domain.
    JoiningLineExits {
        cells: (usize, usize),
        sample: Point2,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        self.failures
            .iter()
            .map(|f| format!("{f:?}"))
            .collect::<Vec<_>>()
            .join("; ")
    }

    /// Cells named by a per-cell failure, in report order.
    pub fn failed_cells(&self) -> Vec<usize> {
        self.failures
            .iter()
            .filter_map(|f| match *f {
                ValidationFailure::NonSimple { cell }
                | ValidationFailure::NotStarShaped { cell, .. }
                | ValidationFailure::NotCounterclockwise { cell, .. } => Some(cell),
                _ => None,
            })
            .collect()
    }
}

/// Returns the first edge not strictly visible from `c`, or `None` when the
/// polygon is star-shaped with respect to `c`.
fn star_violation(polygon: &[Point2], c: Point2) -> Option<usize> {
    let n = polygon.len();
    let h = diameter(polygon);
    let tol = DEGENERACY_TOL * h * h;
    let mut turning = 0.0;
    for l in 0..n {
        let (a, b) = (polygon[l], polygon[(l + 1) % n]);
        let o = orient(a, b, c);
        if o <= tol {
            return Some(l);
        }
        turning += (a - c).cross(b - c).atan2((a - c).dot(b - c));
    }
    // Every edge subtends a positive angle; the loop must wind exactly once.
    if (turning - 2.0 * PI).abs() > 1e-6 {
        return Some(0);
    }
    None
}

pub fn validate_primal(mesh: &PrimalMesh) -> ValidationReport {
    let mut failures = Vec::new();

    let mut cells_area = 0.0;
    for k in 0..mesh.num_cells() {
        let polygon = mesh.cell_polygon(k);
        let area = signed_area(&polygon);
        cells_area += area;
        let simple = is_simple_polygon(&polygon);
        if !simple {
            failures.push(ValidationFailure::NonSimple { cell: k });
        }
        if let Some(edge) = star_violation(&polygon, mesh.cell_points()[k]) {
            failures.push(ValidationFailure::NotStarShaped { cell: k, edge });
        }
        if simple && area <= 0.0 {
            failures.push(ValidationFailure::NotCounterclockwise { cell: k, area });
        }
    }

    for (&edge, inc) in mesh.edges() {
        if inc.cells.len() > 2 {
            failures.push(ValidationFailure::EdgeMultiplicity {
                edge,
                count: inc.cells.len(),
            });
        } else if inc.cells.len() == 2 {
            let dir = |(k, l): (usize, usize)| {
                let c = &mesh.cells()[k];
                (c[l], c[(l + 1) % c.len()])
            };
            if dir(inc.cells[0]) == dir(inc.cells[1]) {
                failures.push(ValidationFailure::InconsistentOrientation { edge });
            }
        }
    }

    let domain_area = mesh.domain_area();
    if (cells_area - domain_area).abs() > 1e-12 * domain_area.abs().max(f64::MIN_POSITIVE) {
        failures.push(ValidationFailure::Coverage {
            cells_area,
            domain_area,
        });
    }

    for inc in mesh.edges().values() {
        if inc.cells.len() != 2 {
            continue;
        }
        let (k1, k2) = (inc.cells[0].0, inc.cells[1].0);
        let (p, q) = (mesh.cell_points()[k1], mesh.cell_points()[k2]);
        for s in 1..=JOINING_LINE_SAMPLES {
            let sample = p.lerp(q, s as f64 / (JOINING_LINE_SAMPLES + 1) as f64);
            if winding_number(mesh.boundary_segments(), sample) == 0 {
                failures.push(ValidationFailure::JoiningLineExits {
                    cells: (k1.min(k2), k1.max(k2)),
                    sample,
                });
                break;
            }
        }
    }

    ValidationReport { failures }
}
