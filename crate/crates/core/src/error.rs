use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operation requires points on S^{expected}, got S^{found}")]
    UnsupportedDimension { expected: usize, found: usize },

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("cap radius {0} outside (0, pi/2)")]
    InvalidRadius(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("parameter {s} outside curve domain [{lo}, {hi}]")]
    ParameterOutOfRange { s: f64, lo: f64, hi: f64 },

    #[error("adaptive quadrature did not converge (estimate {estimate}, error {error_estimate})")]
    NonConvergence { estimate: f64, error_estimate: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("curve is not closed: endpoints differ by {gap}")]
    OpenCurve { gap: f64 },

    #[error("segments {index} and {next} do not join (gap {gap})")]
    Discontinuous { index: usize, next: usize, gap: f64 },

    #[error("unknown builtin design `{0}`")]
    UnknownDesign(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: point norm {norm} is not within 1e-6 of 1")]
    NormViolation {
        path: PathBuf,
        line: usize,
        norm: f64,
    },

    #[error("no points")]
    NoPoints,

    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),

    #[error("coincident circle centers (circles {0} and {1})")]
    CoincidentCenters(usize, usize),

    #[error("circles must share a single radius")]
    MixedRadii,

    #[error("circle {0} meets no other circle; radius too small for the point spacing")]
    IsolatedCircle(usize),

    #[error("circles {0} and {1} are nearly tangent and cannot be resolved")]
    NearTangency(usize, usize),

    #[error("arc graph is not strongly connected")]
    NotStronglyConnected,

    #[error("vertex {0} has unequal in- and out-degree")]
    Unbalanced(usize),

    #[error("not certified at degree {degree} (residual {residual:e})")]
    Uncertified { degree: usize, residual: f64 },

    #[error("speed spectrum tail |c_{n}| = {tail:e} above threshold")]
    SpectrumTail { n: usize, tail: f64 },

    #[error("bracket sign condition violated: eta(1/2) = {eta_low}, eta(1) = {eta_high}")]
    SignCondition { eta_low: f64, eta_high: f64 },

    #[error("evaluation system is rank deficient (reciprocal condition {rcond:e})")]
    RankDeficient { rcond: f64 },

    #[error("polynomial degree {degree} needs at least {needed} Laguerre nodes, got {order}")]
    DegreeOrderMismatch {
        degree: usize,
        order: usize,
        needed: usize,
    },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
