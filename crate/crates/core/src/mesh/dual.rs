use std::f64::consts::PI;

use super::{validate_primal, PrimalMesh};
use crate::error::{FeccError, Result};
use crate::geometry::{signed_area, Point2};

/// A corner of a dual control volume, identified by what it is in the primal mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DualNode {
    /// A primal vertex (only the volume's own vertex, on the boundary).
    Vertex(usize),
    /// The mesh point of a primal cell.
    CellPoint(usize),
    /// Midpoint of a boundary edge, by index into `PrimalMesh::boundary_edges`.
    EdgeMidpoint(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualVolume {
    /// Primal vertex this volume belongs to.
    pub vertex: usize,
    /// Counterclockwise corner loop.
    pub nodes: Vec<DualNode>,
    pub polygon: Vec<Point2>,
    pub center: Point2,
    pub is_boundary: bool,
    /// Incident cells in counterclockwise order about the vertex.
    pub incident_cells: Vec<usize>,
    /// Boundary edges (E_i leaving the vertex, F_i arriving at it), as indices
    /// into `PrimalMesh::boundary_edges`.
    pub boundary_edge_pair: Option<(usize, usize)>,
}

impl DualVolume {
    pub fn area(&self) -> f64 {
        signed_area(&self.polygon)
    }
}

/// One control volume per primal vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMesh {
    volumes: Vec<DualVolume>,
    boundary_edge_midpoints: Vec<Point2>,
}

impl DualMesh {
    pub fn volumes(&self) -> &[DualVolume] {
        &self.volumes
    }

    pub fn volume(&self, i: usize) -> &DualVolume {
        &self.volumes[i]
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// Midpoint of each primal boundary edge, in `boundary_edges` order.
    pub fn boundary_edge_midpoints(&self) -> &[Point2] {
        &self.boundary_edge_midpoints
    }

    pub fn num_interior(&self) -> usize {
        self.volumes.iter().filter(|v| !v.is_boundary).count()
    }

    pub fn total_area(&self) -> f64 {
        self.volumes.iter().map(DualVolume::area).sum()
    }
}

fn angle_from(reference: f64, p: Point2, origin: Point2) -> f64 {
    let a = (p.y - origin.y).atan2(p.x - origin.x) - reference;
    a.rem_euclid(2.0 * PI)
}

/// Whether cells `k1` and `k2` share an edge incident to vertex `i`.
fn share_edge_at(primal: &PrimalMesh, i: usize, k1: usize, k2: usize) -> bool {
    let around = |k: usize| {
        let c = &primal.cells()[k];
        let n = c.len();
        let l = c.iter().position(|&v| v == i).expect("incident cell contains vertex");
        [c[(l + 1) % n], c[(l + n - 1) % n]]
    };
    let a = around(k1);
    let b = around(k2);
    a.iter().any(|x| b.contains(x))
}

pub fn build_dual(primal: &PrimalMesh) -> Result<DualMesh> {
    let report = validate_primal(primal);
    if !report.is_ok() {
        return Err(FeccError::InvalidMesh(report.summary()));
    }
    let nv = primal.num_vertices();
    let vertices = primal.vertices();
    let cell_points = primal.cell_points();

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (k, cell) in primal.cells().iter().enumerate() {
        for &v in cell {
            incident[v].push(k);
        }
    }

    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (e, &(a, b)) in primal.boundary_edges().iter().enumerate() {
        outgoing[a].push(e);
        incoming[b].push(e);
    }
    let midpoints: Vec<Point2> = primal
        .boundary_edges()
        .iter()
        .map(|&(a, b)| vertices[a].midpoint(vertices[b]))
        .collect();

    let mut volumes = Vec::with_capacity(nv);
    for i in 0..nv {
        let origin = vertices[i];
        if incident[i].is_empty() {
            return Err(FeccError::NonManifoldVertex {
                vertex: i,
                reason: "vertex belongs to no cell".into(),
            });
        }
        let is_boundary = !outgoing[i].is_empty() || !incoming[i].is_empty();
        if is_boundary && (outgoing[i].len() != 1 || incoming[i].len() != 1) {
            return Err(FeccError::NonManifoldVertex {
                vertex: i,
                reason: format!(
                    "{} outgoing and {} incoming boundary edges",
                    outgoing[i].len(),
                    incoming[i].len()
                ),
            });
        }

        let reference = if is_boundary {
            let (_, j) = primal.boundary_edges()[outgoing[i][0]];
            let d = vertices[j] - origin;
            d.y.atan2(d.x)
        } else {
            0.0
        };
        let mut cells = incident[i].clone();
        let angles: Vec<f64> = cells
            .iter()
            .map(|&k| angle_from(reference, cell_points[k], origin))
            .collect();
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(cells[a].cmp(&cells[b])));
        for w in order.windows(2) {
            if angles[w[0]] == angles[w[1]] {
                return Err(FeccError::NonManifoldVertex {
                    vertex: i,
                    reason: "two incident cell points at the same angle".into(),
                });
            }
        }
        cells = order.iter().map(|&o| cells[o]).collect();

        let n = cells.len();
        let pairs = if is_boundary { n.saturating_sub(1) } else { n };
        for a in 0..pairs {
            if !share_edge_at(primal, i, cells[a], cells[(a + 1) % n]) {
                return Err(FeccError::NonManifoldVertex {
                    vertex: i,
                    reason: format!(
                        "cells {} and {} are angular neighbours but share no edge at the vertex",
                        cells[a],
                        cells[(a + 1) % n]
                    ),
                });
            }
        }

        let mut nodes = Vec::with_capacity(n + 3);
        let mut boundary_edge_pair = None;
        if is_boundary {
            let (e, f) = (outgoing[i][0], incoming[i][0]);
            let owner = |edge: usize| {
                let key = {
                    let (a, b) = primal.boundary_edges()[edge];
                    (a.min(b), a.max(b))
                };
                primal.edges()[&key].cells[0].0
            };
            if cells[0] != owner(e) || cells[n - 1] != owner(f) {
                return Err(FeccError::NonManifoldVertex {
                    vertex: i,
                    reason: "incident cells do not form a fan between the boundary edges".into(),
                });
            }
            nodes.push(DualNode::Vertex(i));
            nodes.push(DualNode::EdgeMidpoint(e));
            nodes.extend(cells.iter().map(|&k| DualNode::CellPoint(k)));
            nodes.push(DualNode::EdgeMidpoint(f));
            boundary_edge_pair = Some((e, f));
        } else {
            nodes.extend(cells.iter().map(|&k| DualNode::CellPoint(k)));
        }
        let polygon = nodes
            .iter()
            .map(|node| match *node {
                DualNode::Vertex(v) => vertices[v],
                DualNode::CellPoint(k) => cell_points[k],
                DualNode::EdgeMidpoint(e) => midpoints[e],
            })
            .collect();

        volumes.push(DualVolume {
            vertex: i,
            nodes,
            polygon,
            center: origin,
            is_boundary,
            incident_cells: cells,
            boundary_edge_pair,
        });
    }

    Ok(DualMesh {
        volumes,
        boundary_edge_midpoints: midpoints,
    })
}
