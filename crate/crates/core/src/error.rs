use thiserror::Error;

/// Errors raised across the crate. Vertex and edge numbers in messages are
/// 1-based, matching the document format.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("joints {0} and {1} coincide")]
    CoincidentJoints(usize, usize),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("type map is not a homomorphism into Aut(G): {0}")]
    Homomorphism(String),

    #[error("symmetry violated by element {element} at vertex {vertex}: residual {residual:.3e}")]
    SymmetryViolation {
        element: usize,
        vertex: usize,
        residual: f64,
    },

    #[error("{target} domain violation at vertex {vertex}: {reason}")]
    Domain {
        target: String,
        vertex: usize,
        reason: String,
    },

    #[error("vector is not an infinitesimal motion (residual {0:.3e})")]
    NotAMotion(f64),

    #[error("vector is not a self-stress (residual {0:.3e})")]
    NotAStress(f64),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("document error at {path}: {message}")]
    Document { path: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
