//! Symmetric quadrature rules on triangles, in barycentric coordinates.

use crate::error::{FeccError, Result};
use crate::geometry::Point2;

/// Weights sum to one, so `int_T f ~= area(T) * sum_i w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

fn orbit3(a: f64, b: f64) -> Vec<[f64; 3]> {
    vec![[a, b, b], [b, a, b], [b, b, a]]
}

fn orbit6(a: f64, b: f64, c: f64) -> Vec<[f64; 3]> {
    vec![[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

impl TriangleRule {
    /// Lowest-cost rule in the table that is exact for polynomials of `degree`.
    pub fn of_degree(degree: usize) -> Result<Self> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut add = |orbit: Vec<[f64; 3]>, w: f64| {
            weights.extend(std::iter::repeat_n(w, orbit.len()));
            points.extend(orbit);
        };
        let exact = match degree {
            0..=2 => {
                add(orbit3(0.0, 0.5), 1.0 / 3.0);
                2
            }
            3 | 4 => {
                add(orbit3(0.108103018168070, 0.445948490915965), 0.223381589678011);
                add(orbit3(0.816847572980459, 0.091576213509771), 0.109951743655322);
                4
            }
            5 => {
                add(vec![[1.0 / 3.0; 3]], 0.225);
                add(orbit3(0.059715871789770, 0.470142064105115), 0.132394152788506);
                add(orbit3(0.797426985353087, 0.101286507323456), 0.125939180544827);
                5
            }
            6 => {
                add(orbit3(0.501426509658179, 0.249286745170910), 0.116786275726379);
                add(orbit3(0.873821971016996, 0.063089014491502), 0.050844906370207);
                add(
                    orbit6(0.053145049844817, 0.310352451033784, 0.636502499121399),
                    0.082851075618374,
                );
                6
            }
            other => {
                return Err(FeccError::InvalidArgument(format!(
                    "no triangle rule of degree {other}"
                )))
            }
        };
        // Tabulated weights carry 15 digits; normalize so constants integrate exactly.
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            degree: exact,
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical points and weights (scaled by the area) for one triangle.
    pub fn map(&self, tri: [Point2; 3]) -> impl Iterator<Item = (Point2, [f64; 3], f64)> + '_ {
        let area = crate::geometry::triangle_area(tri[0], tri[1], tri[2]);
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            let x = Point2::new(
                l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x,
                l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y,
            );
            (x, *l, w * area)
        })
    }
}
