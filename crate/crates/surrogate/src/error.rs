use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error("variable `{name}`: value does not match its declared form")]
    UndeclaredForm { name: String },
    #[error("expected {expected} feature values, got {got}")]
    FeatureCount { expected: usize, got: usize },
    #[error("sequence length {len} outside 1..={max}")]
    SequenceLength { len: usize, max: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("empty training set")]
    EmptyDataset,
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SurrogateError>;
