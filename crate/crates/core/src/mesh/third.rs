use super::{DualMesh, DualNode, PrimalMesh, DEGENERACY_TOL};
use crate::error::{FeccError, Result};
use crate::geometry::{triangle_area, Point2};

/// What a third-mesh node is in the primal mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(usize),
    CellPoint(usize),
    EdgeMidpoint(usize),
}

/// Triangulation obtained by fanning every dual volume from its center.
///
/// Node numbering: primal vertices first, then cell points, then boundary-edge
/// midpoints. Triangles are grouped by owner volume in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdMesh {
    nodes: Vec<Point2>,
    kinds: Vec<NodeKind>,
    triangles: Vec<[usize; 3]>,
    owner: Vec<usize>,
    /// `owned[m]` is the range of triangles owned by volume `m`.
    owned: Vec<std::ops::Range<usize>>,
}

impl ThirdMesh {
    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn node_kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    pub fn owned_triangles(&self, volume: usize) -> std::ops::Range<usize> {
        self.owned[volume].clone()
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        triangle_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }
}

pub fn build_third(primal: &PrimalMesh, dual: &DualMesh) -> Result<ThirdMesh> {
    let nv = primal.num_vertices();
    let nc = primal.num_cells();
    if dual.len() != nv {
        return Err(FeccError::InvalidArgument(format!(
            "dual mesh has {} volumes for {} primal vertices",
            dual.len(),
            nv
        )));
    }
    let mut nodes = Vec::with_capacity(nv + nc + dual.boundary_edge_midpoints().len());
    let mut kinds = Vec::with_capacity(nodes.capacity());
    nodes.extend_from_slice(primal.vertices());
    kinds.extend((0..nv).map(NodeKind::Vertex));
    nodes.extend_from_slice(primal.cell_points());
    kinds.extend((0..nc).map(NodeKind::CellPoint));
    nodes.extend_from_slice(dual.boundary_edge_midpoints());
    kinds.extend((0..dual.boundary_edge_midpoints().len()).map(NodeKind::EdgeMidpoint));

    let index = |node: DualNode| match node {
        DualNode::Vertex(v) => v,
        DualNode::CellPoint(k) => nv + k,
        DualNode::EdgeMidpoint(e) => nv + nc + e,
    };

    let mut triangles = Vec::new();
    let mut owner = Vec::new();
    let mut owned = Vec::with_capacity(nv);
    for (m, volume) in dual.volumes().iter().enumerate() {
        let start = triangles.len();
        let center = volume.vertex;
        let loop_: Vec<usize> = volume.nodes.iter().map(|&n| index(n)).collect();
        let n = loop_.len();
        for a in 0..n {
            let (p, q) = (loop_[a], loop_[(a + 1) % n]);
            if p == center || q == center {
                continue;
            }
            let tri = [center, p, q];
            let (x, y, z) = (nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            let h = x.distance(y).max(y.distance(z)).max(z.distance(x));
            let area = triangle_area(x, y, z);
            let tolerance = DEGENERACY_TOL * h * h;
            if area <= tolerance {
                return Err(FeccError::DegenerateTriangle {
                    index: triangles.len(),
                    area,
                    tolerance,
                });
            }
            triangles.push(tri);
            owner.push(m);
        }
        owned.push(start..triangles.len());
    }

    Ok(ThirdMesh {
        nodes,
        kinds,
        triangles,
        owner,
        owned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::barycentric;
    use crate::mesh::{build_dual, generate_structured_quads};

    fn third(n: usize) -> ThirdMesh {
        let m = generate_structured_quads(n, n, 0.0, 0).unwrap();
        let d = build_dual(&m).unwrap();
        build_third(&m, &d).unwrap()
    }

    #[test]
    fn two_by_two_counts() {
        let t = third(2);
        assert_eq!(t.num_triangles(), 24);
        assert_eq!(t.num_nodes(), 21);
        assert!((t.total_area() - 1.0).abs() < 1e-15);
        let per_volume: Vec<usize> = (0..9).map(|m| t.owned_triangles(m).len()).collect();
        assert_eq!(per_volume, vec![2, 3, 2, 3, 4, 3, 2, 3, 2]);
    }

    #[test]
    fn single_cell_counts() {
        let t = third(1);
        assert_eq!(t.num_triangles(), 8);
        assert!((t.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn owner_contains_centroid_and_center_is_first_vertex() {
        let m = generate_structured_quads(3, 3, 0.2, 5).unwrap();
        let d = build_dual(&m).unwrap();
        let t = build_third(&m, &d).unwrap();
        for (i, tri) in t.triangles().iter().enumerate() {
            let owner = t.owner()[i];
            assert_eq!(tri[0], owner);
            let [a, b, c] = t.triangle_points(i);
            let g = Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
            let poly = &d.volume(owner).polygon;
            let edges = (0..poly.len()).map(|k| (poly[k], poly[(k + 1) % poly.len()]));
            assert_eq!(crate::geometry::winding_number(edges, g), 1);
            assert!(barycentric(a, b, c, g).iter().all(|&l| l > 0.0));
        }
    }
}
