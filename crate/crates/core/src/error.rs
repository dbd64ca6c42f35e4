use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("every control candidate has zero probability")]
    AllCandidatesExcluded,
    #[error("random environment rejected {attempts} placements for obstacle {obstacle}")]
    RejectionBudgetExceeded { obstacle: usize, attempts: usize },
    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Divergence { epoch: usize, batch: usize, loss: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
