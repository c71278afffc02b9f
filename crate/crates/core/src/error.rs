use thiserror::Error;

/// Errors raised across the simulator, controllers and tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model configuration: {0}")]
    ModelConfiguration(String),

    #[error("integration diverged in zone {zone} at t = {t} s")]
    IntegrationDivergence { zone: usize, t: f64 },

    #[error("component not found: {0}")]
    ComponentNotFound(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ill-posed weights: {0}")]
    IllPosedWeights(String),

    #[error("coordination incomplete: no message from subsystem {0}")]
    CoordinationIncomplete(usize),

    #[error("unstable matrix: spectral radius {0}")]
    UnstableMatrix(f64),

    #[error("solver failed at step {step}: {reason}")]
    SolverFailure { step: usize, reason: String },

    #[error("{controller} controller: {source}")]
    Controller {
        controller: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn with_controller(self, controller: &str) -> Self {
        Error::Controller {
            controller: controller.to_string(),
            source: Box::new(self),
        }
    }
}
