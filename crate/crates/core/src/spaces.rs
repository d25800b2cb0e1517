//! P1 displacements on the third mesh and P0 pressures on the dual volumes.

use crate::error::{FeccError, Result};
use crate::geometry::{barycentric, orient, Point2};
use crate::mesh::{DualMesh, NodeKind, ThirdMesh, DEGENERACY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// On the domain boundary; carries no displacement unknown.
    Boundary,
    CellPoint,
    /// Center of an interior dual volume.
    DualCenter,
}

/// Displacement and pressure numbering.
///
/// Scalar displacement unknowns are numbered cell points first, then interior
/// dual centers. The global displacement vector is component-blocked: all
/// first components, then all second components.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    node_class: Vec<NodeClass>,
    scalar_dof: Vec<Option<usize>>,
    /// Third-mesh node of each scalar unknown.
    dof_node: Vec<usize>,
    n_cell: usize,
    n_center: usize,
    n_p: usize,
}

impl DofMap {
    pub fn node_class(&self) -> &[NodeClass] {
        &self.node_class
    }

    pub fn scalar_dof(&self, node: usize) -> Option<usize> {
        self.scalar_dof[node]
    }

    /// Global displacement index of `(node, component)`.
    pub fn u_index(&self, node: usize, component: usize) -> Option<usize> {
        self.scalar_dof[node].map(|s| component * self.n_scalar() + s)
    }

    pub fn dof_node(&self, scalar: usize) -> usize {
        self.dof_node[scalar]
    }

    /// Pressure index of a dual volume (the volume's primal vertex).
    pub fn p_index(&self, volume: usize) -> usize {
        volume
    }

    pub fn n_cell(&self) -> usize {
        self.n_cell
    }

    pub fn n_center(&self) -> usize {
        self.n_center
    }

    pub fn n_scalar(&self) -> usize {
        self.n_cell + self.n_center
    }

    pub fn n_u(&self) -> usize {
        2 * self.n_scalar()
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }
}

pub fn classify_nodes(third: &ThirdMesh, dual: &DualMesh) -> DofMap {
    let kinds = third.node_kinds();
    let node_class: Vec<NodeClass> = kinds
        .iter()
        .map(|kind| match *kind {
            NodeKind::CellPoint(_) => NodeClass::CellPoint,
            NodeKind::EdgeMidpoint(_) => NodeClass::Boundary,
            NodeKind::Vertex(v) if dual.volume(v).is_boundary => NodeClass::Boundary,
            NodeKind::Vertex(_) => NodeClass::DualCenter,
        })
        .collect();
    let mut scalar_dof = vec![None; kinds.len()];
    let mut dof_node = Vec::new();
    for class in [NodeClass::CellPoint, NodeClass::DualCenter] {
        for (node, c) in node_class.iter().enumerate() {
            if *c == class {
                scalar_dof[node] = Some(dof_node.len());
                dof_node.push(node);
            }
        }
    }
    let n_cell = node_class.iter().filter(|&&c| c == NodeClass::CellPoint).count();
    let n_center = node_class.iter().filter(|&&c| c == NodeClass::DualCenter).count();
    DofMap {
        node_class,
        scalar_dof,
        dof_node,
        n_cell,
        n_center,
        n_p: dual.len(),
    }
}

/// Hat-function values and their (constant) gradients on one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1Shape {
    pub values: [f64; 3],
    pub gradients: [Point2; 3],
}

pub fn p1_gradients(tri: [Point2; 3]) -> Result<(f64, [Point2; 3])> {
    let [a, b, c] = tri;
    let twice = orient(a, b, c);
    let h = a.distance(b).max(b.distance(c)).max(c.distance(a));
    let tolerance = DEGENERACY_TOL * h * h;
    if 0.5 * twice.abs() <= tolerance {
        return Err(FeccError::DegenerateTriangle {
            index: 0,
            area: 0.5 * twice,
            tolerance,
        });
    }
    let g = |p: Point2, q: Point2| Point2::new((p.y - q.y) / twice, (q.x - p.x) / twice);
    Ok((0.5 * twice, [g(b, c), g(c, a), g(a, b)]))
}

pub fn p1_shape(tri: [Point2; 3], x: Point2) -> Result<P1Shape> {
    let (_, gradients) = p1_gradients(tri)?;
    let [a, b, c] = tri;
    Ok(P1Shape {
        values: barycentric(a, b, c, x),
        gradients,
    })
}

/// Nodal displacement values on every third-mesh node (zero on the boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub values: Vec<[f64; 2]>,
}

impl DisplacementField {
    pub fn zeros(num_nodes: usize) -> Self {
        Self {
            values: vec![[0.0; 2]; num_nodes],
        }
    }

    pub fn from_dofs(dofs: &DofMap, u: &[f64]) -> Self {
        let values = (0..dofs.node_class().len())
            .map(|node| {
                let get = |k| dofs.u_index(node, k).map_or(0.0, |i| u[i]);
                [get(0), get(1)]
            })
            .collect();
        Self { values }
    }

    /// Nodal interpolant of `f`, with boundary nodes forced to zero.
    pub fn interpolate(third: &ThirdMesh, dofs: &DofMap, f: impl Fn(Point2) -> [f64; 2]) -> Self {
        let values = third
            .nodes()
            .iter()
            .zip(dofs.node_class())
            .map(|(&p, &class)| if class == NodeClass::Boundary { [0.0; 2] } else { f(p) })
            .collect();
        Self { values }
    }

    pub fn to_dofs(&self, dofs: &DofMap) -> Vec<f64> {
        let mut u = vec![0.0; dofs.n_u()];
        for (node, v) in self.values.iter().enumerate() {
            for (k, &value) in v.iter().enumerate() {
                if let Some(i) = dofs.u_index(node, k) {
                    u[i] = value;
                }
            }
        }
        u
    }
}

/// One constant per dual volume.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    pub values: Vec<f64>,
}

impl PressureField {
    /// Discrete mean `sum_M area(M) p_M`.
    pub fn weighted_sum(&self, dual: &DualMesh) -> f64 {
        self.values
            .iter()
            .zip(dual.volumes())
            .map(|(p, v)| p * v.area())
            .sum()
    }
}

/// Index of the triangle containing `x`; ties go to the lowest owner volume.
pub fn locate(third: &ThirdMesh, x: Point2) -> Option<usize> {
    const SLACK: f64 = 1e-12;
    (0..third.num_triangles()).find(|&t| {
        let [a, b, c] = third.triangle_points(t);
        barycentric(a, b, c, x).iter().all(|&l| l >= -SLACK)
    })
}

pub fn eval_fields(
    third: &ThirdMesh,
    u: &DisplacementField,
    p: &PressureField,
    x: Point2,
) -> Result<([f64; 2], f64)> {
    let t = locate(third, x).ok_or(FeccError::OutsideDomain { x: x.x, y: x.y })?;
    let [a, b, c] = third.triangle_points(t);
    let lam = barycentric(a, b, c, x);
    let tri = third.triangles()[t];
    let mut value = [0.0; 2];
    for (l, &node) in lam.iter().zip(&tri) {
        value[0] += l * u.values[node][0];
        value[1] += l * u.values[node][1];
    }
    Ok((value, p.values[third.owner()[t]]))
}
