use ctxwb_solver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{what}: {msg}")]
    Parse { what: String, msg: String },
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("not applicable: {0}")]
    Unsupported(String),
    #[error("numerical trouble: {0}")]
    Numerical(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(what: impl Into<String>, msg: impl ToString) -> Self {
        Error::Parse { what: what.into(), msg: msg.to_string() }
    }
}
