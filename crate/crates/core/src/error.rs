use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-positive principal curvature {kappa:e} (index {index})")]
    NonPositiveCurvature { index: usize, kappa: f64 },
    #[error("convexity lost at node {node}: principal curvature {kappa:e}")]
    ConvexityLost { node: usize, kappa: f64 },
    #[error("degenerate grid: marker spacing ratio {ratio:.3} exceeds {limit}")]
    DegenerateGrid { ratio: f64, limit: f64 },
    #[error("unsupported ambient curvature {0} (expected 0 or 1)")]
    UnsupportedAmbient(f64),
    #[error("numerical instability: {0}")]
    StabilityViolation(String),
    #[error("time {t} outside the solution domain (extinction at {extinction})")]
    DomainExceeded { t: f64, extinction: f64 },
    #[error("requested time {t} is outside the stored trajectory [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("marker labels are not consistent across the requested time window")]
    LabelMismatch,
    #[error("trajectory required for this operation")]
    MissingTrajectory,
    #[error("this quantity requires {0}")]
    WrongSpeed(&'static str),
    #[error("this quantity requires the Euclidean ambient space")]
    WrongAmbient,
    #[error("{0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
