use thiserror::Error;

use crate::solve::Solution;

#[derive(Debug, Error)]
pub enum FeccError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-manifold vertex {vertex}: {reason}")]
    NonManifoldVertex { vertex: usize, reason: String },

    #[error("degenerate triangle {index}: signed area {area:e} below tolerance {tolerance:e}")]
    DegenerateTriangle {
        index: usize,
        area: f64,
        tolerance: f64,
    },

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("eps-form systems cannot be statically condensed (cross-component coupling at dual centers)")]
    CondensationUnsupported,

    #[error("factorization breakdown at pivot {pivot}: {reason}")]
    FactorizationBreakdown { pivot: usize, reason: String },

    #[error("iteration did not converge within {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Box<Solution>,
    },

    #[error("eigensolve failed: {0}")]
    Eigensolve(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FeccError>;

impl FeccError {
    /// Stable short name for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            FeccError::InvalidArgument(_) => "invalid-argument",
            FeccError::InvalidMesh(_) => "invalid-mesh",
            FeccError::NonManifoldVertex { .. } => "non-manifold-vertex",
            FeccError::DegenerateTriangle { .. } => "degenerate-triangle",
            FeccError::OutsideDomain { .. } => "outside-domain",
            FeccError::NonFinite(_) => "non-finite",
            FeccError::CondensationUnsupported => "condensation-unsupported",
            FeccError::FactorizationBreakdown { .. } => "factorization-breakdown",
            FeccError::NotConverged { .. } => "not-converged",
            FeccError::Eigensolve(_) => "eigensolve",
            FeccError::Parse { .. } => "parse",
            FeccError::Io(_) => "io",
        }
    }

    /// Errors caused by bad input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            FeccError::InvalidArgument(_)
                | FeccError::InvalidMesh(_)
                | FeccError::NonManifoldVertex { .. }
                | FeccError::DegenerateTriangle { .. }
                | FeccError::OutsideDomain { .. }
                | FeccError::CondensationUnsupported
                | FeccError::Parse { .. }
        )
    }
}
