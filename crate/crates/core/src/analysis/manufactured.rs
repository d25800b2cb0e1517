//! Closed-form manufactured solution on the unit square.

use crate::assembly::Form;
use crate::error::{FeccError, Result};
use crate::geometry::Point2;

pub trait ExactSolution {
    fn u(&self, x: Point2) -> [f64; 2];
    /// `grad[i][j] = d u_i / d x_j`
    fn grad_u(&self, x: Point2) -> [[f64; 2]; 2];
    fn p(&self, x: Point2) -> f64;
    fn f(&self, x: Point2) -> [f64; 2];
}

// g(t) = t^2 (1 - t)^2 and derivatives.
fn g0(t: f64) -> f64 {
    t * t * (1.0 - t) * (1.0 - t)
}
fn g1(t: f64) -> f64 {
    2.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}
fn g2(t: f64) -> f64 {
    2.0 * (1.0 - 6.0 * t + 6.0 * t * t)
}
fn g3(t: f64) -> f64 {
    24.0 * t - 12.0
}

/// Potential `phi = g(x) g(y)` gives `u = curl phi + grad phi / lambda`, so
/// `div u = lap phi / lambda` and `p = lap phi` for every lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub lambda: f64,
    pub mu: f64,
    /// Elastic operator for which `f` is computed.
    pub form: Form,
}

impl ManufacturedProblem {
    pub fn new(lambda: f64, mu: f64, form: Form) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && mu > 0.0 && mu.is_finite()) {
            return Err(FeccError::InvalidArgument(format!(
                "manufactured problem needs positive finite lambda, mu (got {lambda}, {mu})"
            )));
        }
        Ok(Self { lambda, mu, form })
    }

    fn grad_lap_phi(&self, x: Point2) -> [f64; 2] {
        [
            g3(x.x) * g0(x.y) + g1(x.x) * g2(x.y),
            g2(x.x) * g1(x.y) + g0(x.x) * g3(x.y),
        ]
    }
}

impl ExactSolution for ManufacturedProblem {
    fn u(&self, x: Point2) -> [f64; 2] {
        let l = self.lambda;
        [
            g0(x.x) * g1(x.y) + g1(x.x) * g0(x.y) / l,
            -g1(x.x) * g0(x.y) + g0(x.x) * g1(x.y) / l,
        ]
    }

    fn grad_u(&self, x: Point2) -> [[f64; 2]; 2] {
        let l = self.lambda;
        let (a0, a1, a2) = (g0(x.x), g1(x.x), g2(x.x));
        let (b0, b1, b2) = (g0(x.y), g1(x.y), g2(x.y));
        [
            [a1 * b1 + a2 * b0 / l, a0 * b2 + a1 * b1 / l],
            [-a2 * b0 + a1 * b1 / l, -a1 * b1 + a0 * b2 / l],
        ]
    }

    fn p(&self, x: Point2) -> f64 {
        g2(x.x) * g0(x.y) + g0(x.x) * g2(x.y)
    }

    fn f(&self, x: Point2) -> [f64; 2] {
        let [dx, dy] = self.grad_lap_phi(x);
        let (mu, l) = (self.mu, self.lambda);
        match self.form {
            // -div(2 mu eps(u)) - grad p
            Form::Eps => [
                -mu * dy - (2.0 * mu / l + 1.0) * dx,
                mu * dx - (2.0 * mu / l + 1.0) * dy,
            ],
            // -mu lap u - grad p
            Form::Grad => [
                -mu * (dy + dx / l) - dx,
                -mu * (-dx + dy / l) - dy,
            ],
        }
    }
}
