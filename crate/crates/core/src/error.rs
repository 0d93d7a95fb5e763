use std::path::PathBuf;

use thiserror::Error;

use crate::geom::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is out of range (allowed: {limit})")]
    Bounds {
        what: &'static str,
        value: String,
        limit: String,
    },

    #[error("degenerate cell {cell}: {detail}")]
    Geometry { cell: usize, detail: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-finite value at ({}, {})", point[0], point[1])]
    Singularity { point: Point },

    #[error("adaptive quadrature did not reach relative tolerance {rel_tol:e} within {leaves} leaves (estimated error {estimate:e})")]
    Quadrature { rel_tol: f64, leaves: usize, estimate: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("field is defined on a mesh with {found} cells, expected {expected}")]
    Alignment { expected: usize, found: usize },

    #[error("coefficient is not coercive (smallest eigenvalue {min_eigenvalue:e}); assembly refused")]
    NotCoercive { min_eigenvalue: f64 },

    #[error("matrix is not positive definite: curvature {curvature:e} at iteration {iteration}")]
    NotSpd { iteration: usize, curvature: f64 },

    #[error("conjugate gradient stopped after {iterations} iterations with relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("mesh has no interior vertex; refine at least once")]
    DomainTooCoarse,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("mesh at level {fine} is not a refinement of level {coarse}")]
    Lineage { coarse: u32, fine: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },
}

impl Error {
    pub(crate) fn bounds(what: &'static str, value: impl ToString, limit: impl ToString) -> Self {
        Error::Bounds {
            what,
            value: value.to_string(),
            limit: limit.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Bounds { .. } | Error::Lineage { .. } => 2,
            Error::Io { .. } | Error::Format { .. } => 4,
            _ => 3,
        }
    }
}
