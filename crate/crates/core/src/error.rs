use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),

    #[error("unknown edge id {0}")]
    UnknownEdge(usize),

    #[error("point x = {x} outside edge {edge} of length {length}")]
    PointOutsideEdge { edge: usize, x: f64, length: f64 },

    #[error("invalid vertex conditions: {0}")]
    InvalidConditions(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vertex conditions at vertex {0} are not self-adjoint")]
    NotSelfAdjoint(usize),

    #[error("mesh too coarse: h = {h} exceeds {limit}")]
    MeshTooCoarse { h: f64, limit: f64 },

    #[error("shift {0} is numerically singular; perturb it")]
    SingularShift(f64),

    #[error("eigenvalue counting failed: {0}")]
    Counting(String),

    #[error("completeness certificate failed: {0}")]
    Certificate(String),

    #[error("numerical rank {found} at lambda = {lambda} disagrees with multiplicity {expected}")]
    RankMismatch {
        lambda: f64,
        expected: usize,
        found: usize,
    },

    #[error("eigenvalue crossing along the coupling path at tau = {tau}")]
    EigenvalueCrossing { tau: f64 },

    #[error("truncation too small: Lambda * t = {0} < 30")]
    TruncationTooSmall(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
