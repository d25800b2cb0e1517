//! Discretization errors against an exact solution.

use crate::analysis::manufactured::ExactSolution;
use crate::analysis::quadrature::TriangleRule;
use crate::assembly::triangle_gradients;
use crate::discretization::Discretization;
use crate::error::Result;
use crate::spaces::DisplacementField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `||u - u_h||_0`
    pub l2_u: f64,
    /// `|u - u_h|_1`
    pub h1_u: f64,
    /// `||p - p_h||_0`
    pub l2_p: f64,
}

/// Errors of `(u_h, p_h)` using a triangle rule of the given degree on every third-mesh triangle.
/// Pressure errors are taken volume by volume against the constant `p_M`.
pub fn error_norms(
    disc: &Discretization,
    u: &[f64],
    p: &[f64],
    exact: &dyn ExactSolution,
    degree: usize,
) -> Result<ErrorNorms> {
    let rule = TriangleRule::of_degree(degree)?;
    let field = DisplacementField::from_dofs(&disc.dofs, u);
    let third = &disc.third;
    let (mut l2_u, mut h1_u, mut l2_p) = (0.0, 0.0, 0.0);
    for t in 0..third.num_triangles() {
        let tri = third.triangles()[t];
        let (_, g) = triangle_gradients(third, t)?;
        let mut grad_h = [[0.0; 2]; 2];
        for (a, &node) in tri.iter().enumerate() {
            for i in 0..2 {
                grad_h[i][0] += field.values[node][i] * g[a].x;
                grad_h[i][1] += field.values[node][i] * g[a].y;
            }
        }
        let p_h = p[disc.dofs.p_index(third.owner()[t])];
        for (x, lam, w) in rule.map(third.triangle_points(t)) {
            let ue = exact.u(x);
            let ge = exact.grad_u(x);
            for i in 0..2 {
                let uh: f64 = (0..3).map(|a| lam[a] * field.values[tri[a]][i]).sum();
                l2_u += w * (ue[i] - uh).powi(2);
                for j in 0..2 {
                    h1_u += w * (ge[i][j] - grad_h[i][j]).powi(2);
                }
            }
            l2_p += w * (exact.p(x) - p_h).powi(2);
        }
    }
    Ok(ErrorNorms {
        l2_u: l2_u.sqrt(),
        h1_u: h1_u.sqrt(),
        l2_p: l2_p.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::mesh::generate_structured_quads;

    /// Linear field vanishing nowhere; its interpolant is exact.
    struct Linear;

    impl ExactSolution for Linear {
        fn u(&self, x: Point2) -> [f64; 2] {
            [1.0 + 2.0 * x.x - x.y, 0.5 * x.y]
        }
        fn grad_u(&self, _: Point2) -> [[f64; 2]; 2] {
            [[2.0, -1.0], [0.0, 0.5]]
        }
        fn p(&self, _: Point2) -> f64 {
            3.0
        }
        fn f(&self, _: Point2) -> [f64; 2] {
            [0.0, 0.0]
        }
    }

    #[test]
    fn interpolated_linear_field_has_zero_error() {
        let disc = Discretization::new(generate_structured_quads(3, 3, 0.2, 4).unwrap()).unwrap();
        // Keep boundary values too, bypassing the DOF vector.
        let nodes = disc.third.nodes();
        let mut values: Vec<f64> = vec![0.0; disc.dofs.n_u()];
        for (node, &x) in nodes.iter().enumerate() {
            for k in 0..2 {
                if let Some(i) = disc.dofs.u_index(node, k) {
                    values[i] = Linear.u(x)[k];
                }
            }
        }
        let p = vec![3.0; disc.dofs.n_p()];
        let e = error_norms(&disc, &values, &p, &Linear, 4).unwrap();
        assert!(e.l2_p < 1e-13);
        // Boundary nodes are zero, so only boundary-adjacent triangles contribute.
        assert!(e.l2_u > 0.0);

        struct Zero;
        impl ExactSolution for Zero {
            fn u(&self, _: Point2) -> [f64; 2] { [0.0; 2] }
            fn grad_u(&self, _: Point2) -> [[f64; 2]; 2] { [[0.0; 2]; 2] }
            fn p(&self, _: Point2) -> f64 { 0.0 }
            fn f(&self, _: Point2) -> [f64; 2] { [0.0; 2] }
        }
        let z = error_norms(&disc, &vec![0.0; disc.dofs.n_u()], &vec![0.0; disc.dofs.n_p()], &Zero, 6).unwrap();
        assert_eq!((z.l2_u, z.h1_u, z.l2_p), (0.0, 0.0, 0.0));
    }
}
