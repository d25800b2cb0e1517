//! The `FECCMESH 1` polygonal mesh format.
//!
//! ```text
//! FECCMESH 1
//! # comments and blank lines are ignored
//! VERTICES 4
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! CELLS 1
//! 4 0 1 2 3
//! CELLPOINTS 1      (optional; defaults to centroids)
//! 0.5 0.5
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{FeccError, Result};
use crate::geometry::{is_simple_polygon, polygon_centroid, signed_area, Point2};
use crate::mesh::{validate_primal, PrimalMesh, ValidationFailure};

pub const HEADER: &str = "FECCMESH 1";

#[derive(Debug, Clone)]
pub struct ParsedMesh {
    pub mesh: PrimalMesh,
    /// Non-fatal corrections, such as reversed clockwise cells.
    pub warnings: Vec<String>,
}

fn parse_err(line: usize, message: impl Into<String>) -> FeccError {
    FeccError::Parse {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-empty line with comments stripped, and its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if !content.is_empty() {
                return Some((i + 1, content));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let after = self.last;
        self.next()
            .ok_or_else(|| parse_err(after + 1, format!("unexpected end of file, expected {what}")))
    }
}

fn section(line: usize, text: &str, keyword: &str) -> Result<usize> {
    let mut parts = text.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(parse_err(line, format!("expected '{keyword} <count>'")));
    }
    let count = parts
        .next()
        .and_then(|c| c.parse::<usize>().ok())
        .ok_or_else(|| parse_err(line, format!("'{keyword}' needs a non-negative integer count")))?;
    if parts.next().is_some() {
        return Err(parse_err(line, "trailing tokens after count"));
    }
    Ok(count)
}

fn point(line: usize, text: &str) -> Result<Point2> {
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("'{t}' is not a number"))))
        .collect::<Result<_>>()?;
    match values[..] {
        [x, y] if x.is_finite() && y.is_finite() => Ok(Point2::new(x, y)),
        [_, _] => Err(parse_err(line, "coordinates must be finite")),
        _ => Err(parse_err(line, format!("expected 2 coordinates, found {}", values.len()))),
    }
}

pub fn parse_mesh(text: &str) -> Result<ParsedMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (line, header) = lines.expect("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["FECCMESH", "1"] {
        return Err(parse_err(line, format!("expected header '{HEADER}'")));
    }

    let (line, text_) = lines.expect("VERTICES section")?;
    let nv = section(line, text_, "VERTICES")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, t) = lines.expect("vertex coordinates")?;
        vertices.push(point(line, t)?);
    }

    let (cells_line, text_) = lines.expect("CELLS section")?;
    let nc = section(cells_line, text_, "CELLS")?;
    let mut cells = Vec::with_capacity(nc);
    let mut cell_lines = Vec::with_capacity(nc);
    let mut warnings = Vec::new();
    for k in 0..nc {
        let (line, t) = lines.expect("cell definition")?;
        let ints: Vec<usize> = t
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|_| parse_err(line, format!("'{s}' is not a vertex index"))))
            .collect::<Result<_>>()?;
        let count = ints[0];
        if count < 3 {
            return Err(parse_err(line, format!("cell {k} needs at least 3 vertices")));
        }
        if ints.len() != count + 1 {
            return Err(parse_err(line, format!("cell {k} declares {count} vertices but lists {}", ints.len() - 1)));
        }
        let mut cell = ints[1..].to_vec();
        if let Some(&bad) = cell.iter().find(|&&v| v >= nv) {
            return Err(parse_err(line, format!("vertex index {bad} out of range (mesh has {nv} vertices)")));
        }
        let mut sorted = cell.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != cell.len() {
            return Err(parse_err(line, format!("cell {k} repeats a vertex")));
        }
        let polygon: Vec<Point2> = cell.iter().map(|&v| vertices[v]).collect();
        if !is_simple_polygon(&polygon) {
            return Err(parse_err(line, format!("cell {k} is not a simple polygon")));
        }
        let area = signed_area(&polygon);
        if area == 0.0 {
            return Err(parse_err(line, format!("cell {k} has zero area")));
        }
        if area < 0.0 {
            cell.reverse();
            warnings.push(format!("line {line}: cell {k} was clockwise and has been reversed"));
        }
        cells.push(cell);
        cell_lines.push(line);
    }

    let mut cell_points = None;
    if let Some((line, t)) = lines.next() {
        let count = section(line, t, "CELLPOINTS")?;
        if count != nc {
            return Err(parse_err(line, format!("CELLPOINTS has {count} entries but there are {nc} cells")));
        }
        let mut points = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (line, t) = lines.expect("cell point coordinates")?;
            points.push(point(line, t)?);
        }
        cell_points = Some(points);
        if let Some((line, _)) = lines.next() {
            return Err(parse_err(line, "unexpected content after CELLPOINTS"));
        }
    }

    let mesh = PrimalMesh::new(vertices, cells, cell_points).map_err(|e| parse_err(cells_line, e.to_string()))?;
    let report = validate_primal(&mesh);
    if let Some(failure) = report.failures.first() {
        let line = match *failure {
            ValidationFailure::NonSimple { cell }
            | ValidationFailure::NotStarShaped { cell, .. }
            | ValidationFailure::NotCounterclockwise { cell, .. } => cell_lines[cell],
            ValidationFailure::JoiningLineExits { cells: (k, _), .. } => cell_lines[k],
            _ => cells_line,
        };
        return Err(parse_err(line, format!("invalid mesh: {}", report.summary())));
    }
    Ok(ParsedMesh { mesh, warnings })
}

pub fn read_mesh(path: &Path) -> Result<ParsedMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

/// Coordinates use 17 significant digits, which round-trip every `f64`.
pub fn serialize_mesh(mesh: &PrimalMesh) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "VERTICES {}", mesh.num_vertices()).unwrap();
    for p in mesh.vertices() {
        writeln!(out, "{:.16e} {:.16e}", p.x, p.y).unwrap();
    }
    writeln!(out, "CELLS {}", mesh.num_cells()).unwrap();
    for cell in mesh.cells() {
        write!(out, "{}", cell.len()).unwrap();
        for v in cell {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    let custom = (0..mesh.num_cells()).any(|k| polygon_centroid(&mesh.cell_polygon(k)) != mesh.cell_points()[k]);
    if custom {
        writeln!(out, "CELLPOINTS {}", mesh.num_cells()).unwrap();
        for p in mesh.cell_points() {
            writeln!(out, "{:.16e} {:.16e}", p.x, p.y).unwrap();
        }
    }
    out
}

pub fn write_mesh(mesh: &PrimalMesh, path: &Path) -> Result<()> {
    std::fs::write(path, serialize_mesh(mesh))?;
    Ok(())
}
