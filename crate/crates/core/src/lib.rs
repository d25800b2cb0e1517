//! Mixed finite elements on cell-centered dual meshes for nearly
//! incompressible linear elasticity.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod condense;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod io;
pub mod material;
pub mod mesh;
pub mod spaces;
pub mod solve;
pub mod sparse;

pub use assembly::{Form, SaddleSystem};
pub use discretization::Discretization;
pub use error::{FeccError, Result};
pub use geometry::Point2;
pub use material::MaterialParams;
