use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] evento_core::Error),
    #[error("invalid model artifact: {0}")]
    Schema(String),
    #[error("{0}")]
    InvalidRequest(String),
    #[error("{0}")]
    NotFound(String),
}

impl ServiceError {
    /// Stable machine-readable code for API payloads.
    pub fn code(&self) -> &'static str {
        use evento_core::Error as E;
        match self {
            ServiceError::Core(e) => match e {
                E::UnknownLabel(_) => "unknown_label",
                E::MaskOutOfRange { .. } => "invalid_mask",
                E::InsufficientHistory { .. } => "insufficient_history",
                E::Ingest { .. } | E::Header(_) => "invalid_dataset",
                E::InvalidConfig(_) => "invalid_config",
                E::InfeasibleTarget { .. } | E::LimitOnly { .. } | E::NoConvergence { .. } => {
                    "infeasible_target"
                }
                _ => "invalid_input",
            },
            ServiceError::Schema(_) => "invalid_model",
            ServiceError::InvalidRequest(_) => "invalid_request",
            ServiceError::NotFound(_) => "not_found",
        }
    }
}

pub type ServiceResult<T> = Result<T, ServiceError>;
