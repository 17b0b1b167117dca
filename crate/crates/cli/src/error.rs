use harnack_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("convexity lost: {0}")]
    ConvexityLost(String),
    #[error("numerical instability: {0}")]
    Instability(String),
    /// Positivity or residual threshold not met; outputs were still written.
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::ConvexityLost(_) => 2,
            CliError::Instability(_) | CliError::Io { .. } => 3,
            CliError::CheckFailed(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ConvexityLost { .. } | CoreError::NonPositiveCurvature { .. } => CliError::ConvexityLost(e.to_string()),
            CoreError::StabilityViolation(_)
            | CoreError::DegenerateGrid { .. }
            | CoreError::LabelMismatch
            | CoreError::OutOfRange { .. } => CliError::Instability(e.to_string()),
            CoreError::UnsupportedAmbient(_)
            | CoreError::DomainExceeded { .. }
            | CoreError::MissingTrajectory
            | CoreError::WrongSpeed(_)
            | CoreError::WrongAmbient
            | CoreError::InvalidConfig(_) => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
