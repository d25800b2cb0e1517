//! Legacy ASCII VTK export of solved fields on the third mesh.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::mesh::ThirdMesh;
use crate::spaces::{DisplacementField, PressureField};

/// Triangle cell type in the legacy format.
const VTK_TRIANGLE: u8 = 5;

pub fn vtk_string(third: &ThirdMesh, u: &DisplacementField, p: &PressureField) -> String {
    let mut out = String::new();
    let nodes = third.nodes();
    let tris = third.triangles();
    writeln!(out, "# vtk DataFile Version 3.0").unwrap();
    writeln!(out, "fecc displacement and pressure").unwrap();
    writeln!(out, "ASCII").unwrap();
    writeln!(out, "DATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(out, "POINTS {} double", nodes.len()).unwrap();
    for x in nodes {
        writeln!(out, "{:.16e} {:.16e} 0", x.x, x.y).unwrap();
    }
    writeln!(out, "CELLS {} {}", tris.len(), 4 * tris.len()).unwrap();
    for t in tris {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(out, "CELL_TYPES {}", tris.len()).unwrap();
    for _ in tris {
        writeln!(out, "{VTK_TRIANGLE}").unwrap();
    }
    writeln!(out, "POINT_DATA {}", nodes.len()).unwrap();
    writeln!(out, "VECTORS displacement double").unwrap();
    for v in &u.values {
        writeln!(out, "{:.16e} {:.16e} 0", v[0], v[1]).unwrap();
    }
    writeln!(out, "CELL_DATA {}", tris.len()).unwrap();
    writeln!(out, "SCALARS pressure double 1").unwrap();
    writeln!(out, "LOOKUP_TABLE default").unwrap();
    for &owner in third.owner() {
        writeln!(out, "{:.16e}", p.values[owner]).unwrap();
    }
    out
}

pub fn export_vtk(third: &ThirdMesh, u: &DisplacementField, p: &PressureField, path: &Path) -> Result<()> {
    std::fs::write(path, vtk_string(third, u, p))?;
    Ok(())
}
