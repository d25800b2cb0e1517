use crate::error::Result;
use crate::mesh::{build_dual, build_third, DualMesh, PrimalMesh, ThirdMesh};
use crate::spaces::{classify_nodes, DofMap};

/// The three meshes and the unknown numbering built from one primal mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub primal: PrimalMesh,
    pub dual: DualMesh,
    pub third: ThirdMesh,
    pub dofs: DofMap,
}

impl Discretization {
    pub fn new(primal: PrimalMesh) -> Result<Self> {
        let dual = build_dual(&primal)?;
        let third = build_third(&primal, &dual)?;
        let dofs = classify_nodes(&third, &dual);
        Ok(Self {
            primal,
            dual,
            third,
            dofs,
        })
    }
}
