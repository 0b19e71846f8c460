use multiverse_core::analysis::AnalysisError;
use multiverse_core::branching::BranchError;
use multiverse_core::dynamics::DynamicsError;
use multiverse_core::spin::SpinError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(DynamicsError),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::SelfCheck(_) => 4,
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidParameter { .. }
            | DynamicsError::Resolution { .. }
            | DynamicsError::InvalidDuration(_) => CliError::Config(e.to_string()),
            DynamicsError::Boundary { .. } | DynamicsError::GridMismatch { .. } => CliError::Solver(e),
        }
    }
}

impl From<BranchError> for CliError {
    fn from(e: BranchError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Dynamics(d) => d.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}
