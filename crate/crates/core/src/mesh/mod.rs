//! Primal, dual, and third meshes.

mod dual;
mod generate;
mod primal;
mod third;
mod validate;

pub use dual::{build_dual, DualMesh, DualNode, DualVolume};
pub use generate::{
    generate_structured_quads, generate_structured_triangles, MeshFamily, MAX_PERTURB,
};
pub use primal::{EdgeIncidence, PrimalMesh};
pub use third::{build_third, NodeKind, ThirdMesh};
pub use validate::{
    validate_primal, ValidationFailure, ValidationReport, DEGENERACY_TOL, JOINING_LINE_SAMPLES,
};
