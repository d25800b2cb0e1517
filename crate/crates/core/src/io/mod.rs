//! Text formats: mesh files, VTK export, CSV reports.

pub mod mesh_file;
pub mod report;
pub mod vtk;

pub use mesh_file::{parse_mesh, read_mesh, serialize_mesh, write_mesh, ParsedMesh};
pub use report::{convergence_csv, infsup_csv, locking_csv, InfSupRow};
pub use vtk::{export_vtk, vtk_string};
