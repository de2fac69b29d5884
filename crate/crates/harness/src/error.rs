use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] horotorus::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("degenerate fit: {0}")]
    Fit(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// 1 for a failed invariant, 2 for configuration, budget, precision and
    /// i/o problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invariant(_) | HarnessError::Core(horotorus::Error::Internal(_)) => 1,
            _ => 2,
        }
    }
}
