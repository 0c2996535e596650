use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("program too large: total PSD dimension {dim} exceeds cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("solver backend `{0}` is not available")]
    BackendUnavailable(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("i/o: {0}")]
    Io(String),
}
