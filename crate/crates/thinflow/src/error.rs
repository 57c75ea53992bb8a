use crate::config::ConfigError;

/// Errors of the std layer. [`ThinflowError::category`] is the stable token
/// printed by the CLI.
#[derive(Debug, thiserror::Error)]
pub enum ThinflowError {
    #[error(transparent)]
    Core(#[from] thinflow_core::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Bisection(String),
    #[error("{0}")]
    Usage(String),
}

impl ThinflowError {
    pub fn category(&self) -> &'static str {
        use thinflow_core::Error as E;
        match self {
            ThinflowError::Core(e) => match e {
                E::InvalidGrid { .. } | E::GridMismatch { .. } => "grid",
                E::UnderResolved { .. } => "under-resolved",
                E::NonZeroMean { .. } => "nonzero-mean",
                E::CflViolation { .. } => "cfl",
                E::InvalidConfig(_) => "config",
                E::InvalidRegion(_) => "region",
                E::SingularIntegrand { .. } => "singular-integrand",
                E::InsufficientPoints { .. } => "insufficient-points",
            },
            ThinflowError::Config(_) => "config",
            ThinflowError::Io(_) => "io",
            ThinflowError::Csv(_) | ThinflowError::Json(_) => "format",
            ThinflowError::Bisection(_) => "bisection",
            ThinflowError::Usage(_) => "usage",
        }
    }
}

pub type Result<T, E = ThinflowError> = std::result::Result<T, E>;
