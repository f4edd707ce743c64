use thiserror::Error;

/// Errors surfaced by the lattice GFF laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh too coarse: boundary component {component} resolved by only {count} vertices (need >= {min})")]
    MeshTooCoarse {
        component: usize,
        count: usize,
        min: usize,
    },
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("linear solve failed: {0}")]
    SolverFailure(String),
    #[error("vertex {0} is outside the domain interior")]
    VertexOutOfDomain(usize),
    #[error("oracle is not calibrated; run calibration first")]
    NotCalibrated,
    #[error("boundary sets overlap or are invalid: {0}")]
    OverlappingBoundarySets(String),
    #[error("empty boundary or vertex set: {0}")]
    EmptySet(String),
    #[error("complement of the conditioning set is empty")]
    EmptyComplement,
    #[error("radius {radius} is below lattice resolution (need >= {min})")]
    RadiusBelowResolution { radius: f64, min: f64 },
    #[error("vertex {0} lies inside the local set")]
    VertexInSet(usize),
    #[error("configuration violates an operation precondition: {0}")]
    ConfigViolation(String),
    #[error("ring radius {0} leaves the domain")]
    RingOutsideDomain(f64),
    #[error("too few samples: got {got}, need >= {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("calibration failed: {0}")]
    CalibrationFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
