use std::collections::BTreeMap;

use crate::error::{FeccError, Result};
use crate::geometry::{diameter, polygon_centroid, Point2};

/// Cells incident to one undirected edge, with the local position of the edge
/// in each cell (edge `l` of a cell runs from local vertex `l` to `l + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeIncidence {
    pub cells: Vec<(usize, usize)>,
}

/// Polygonal primal mesh with one mesh point per cell.
///
/// Only index-level structure is enforced here; geometric admissibility is
/// checked by [`crate::mesh::validate_primal`].
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalMesh {
    vertices: Vec<Point2>,
    cells: Vec<Vec<usize>>,
    cell_points: Vec<Point2>,
    boundary_edges: Vec<(usize, usize)>,
    edges: BTreeMap<(usize, usize), EdgeIncidence>,
}

impl PrimalMesh {
    /// Builds a mesh from vertex coordinates and vertex-index polygons.
    /// Cell points default to polygon centroids.
    pub fn new(
        vertices: Vec<Point2>,
        cells: Vec<Vec<usize>>,
        cell_points: Option<Vec<Point2>>,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(FeccError::InvalidMesh("mesh has no cells".into()));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(FeccError::InvalidMesh(format!("vertex {i} is not finite")));
        }
        for (k, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(FeccError::InvalidMesh(format!(
                    "cell {k} has {} vertices",
                    cell.len()
                )));
            }
            for &v in cell {
                if v >= vertices.len() {
                    return Err(FeccError::InvalidMesh(format!(
                        "cell {k} references vertex {v} but the mesh has {} vertices",
                        vertices.len()
                    )));
                }
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cell.len() {
                return Err(FeccError::InvalidMesh(format!(
                    "cell {k} repeats a vertex"
                )));
            }
        }

        let cell_points = match cell_points {
            Some(points) => {
                if points.len() != cells.len() {
                    return Err(FeccError::InvalidMesh(format!(
                        "{} cell points given for {} cells",
                        points.len(),
                        cells.len()
                    )));
                }
                if let Some(k) = points.iter().position(|p| !p.is_finite()) {
                    return Err(FeccError::InvalidMesh(format!(
                        "cell point {k} is not finite"
                    )));
                }
                points
            }
            None => cells
                .iter()
                .map(|c| polygon_centroid(&c.iter().map(|&v| vertices[v]).collect::<Vec<_>>()))
                .collect(),
        };

        let mut edges: BTreeMap<(usize, usize), EdgeIncidence> = BTreeMap::new();
        for (k, cell) in cells.iter().enumerate() {
            let n = cell.len();
            for l in 0..n {
                let (a, b) = (cell[l], cell[(l + 1) % n]);
                edges
                    .entry((a.min(b), a.max(b)))
                    .or_insert_with(|| EdgeIncidence { cells: Vec::new() })
                    .cells
                    .push((k, l));
            }
        }
        let boundary_edges = edges
            .values()
            .filter(|inc| inc.cells.len() == 1)
            .map(|inc| {
                let (k, l) = inc.cells[0];
                let cell = &cells[k];
                (cell[l], cell[(l + 1) % cell.len()])
            })
            .collect();

        Ok(Self {
            vertices,
            cells,
            cell_points,
            boundary_edges,
            edges,
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_points(&self) -> &[Point2] {
        &self.cell_points
    }

    /// Boundary edges, oriented as in their owning cell.
    pub fn boundary_edges(&self) -> &[(usize, usize)] {
        &self.boundary_edges
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), EdgeIncidence> {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_polygon(&self, k: usize) -> Vec<Point2> {
        self.cells[k].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Largest cell diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.cells.len())
            .map(|k| diameter(&self.cell_polygon(k)))
            .fold(0.0, f64::max)
    }

    /// Area enclosed by the oriented boundary edges.
    pub fn domain_area(&self) -> f64 {
        0.5 * self
            .boundary_edges
            .iter()
            .map(|&(a, b)| self.vertices[a].cross(self.vertices[b]))
            .sum::<f64>()
    }

    pub fn boundary_segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.boundary_edges
            .iter()
            .map(|&(a, b)| (self.vertices[a], self.vertices[b]))
    }

    /// Flags vertices lying on a boundary edge.
    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for &(a, b) in &self.boundary_edges {
            flags[a] = true;
            flags[b] = true;
        }
        flags
    }
}
