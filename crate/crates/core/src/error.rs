use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate extent: {0}")]
    DegenerateExtent(String),
    #[error("malformed lozenge tiling: {0}")]
    MalformedTiling(String),
    #[error("graph failed validation: {0}")]
    Invalid(String),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("vertex {0} lies on the boundary of the region")]
    BoundaryVertex(usize),
    #[error("endpoints are not connected in the rhombus complex")]
    Disconnected,
    #[error("quadrature did not converge (estimated error {error:.3e})")]
    QuadratureNonConvergence { error: f64 },
    #[error("kernel is singular: {0}")]
    SingularKernel(String),
    #[error("no perfect matching exists on the region")]
    NoPerfectMatching,
    #[error("enumeration budget of {0} matchings exceeded")]
    EnumerationBudget(usize),
    #[error("region has {0} dual vertices, above the cap of {1}")]
    RegionTooLarge(usize, usize),
    #[error("conditional probability {value:.3e} at dual vertex {vertex} is negative")]
    NegativeProbability { vertex: usize, value: f64 },
    #[error("conditional probabilities at dual vertex {vertex} sum to {sum}")]
    InconsistentProbabilities { vertex: usize, sum: f64 },
    #[error("not a valid height function at face {face}: {reason}")]
    InvalidHeight { face: usize, reason: String },
    #[error("paths overlap or come closer than the required separation")]
    OverlappingPaths,
    #[error("coincident positions")]
    CoincidentPositions,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
