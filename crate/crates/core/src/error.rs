use thiserror::Error;

/// Errors raised across the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0} is not a limit ordinal")]
    NotLimit(String),
    #[error("{0} has no predecessor")]
    NoPredecessor(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid measure index: {0}")]
    InvalidIndex(String),
    #[error("unsupported sequence schema: {0}")]
    UnsupportedSchema(String),
    #[error("covering hypothesis violated: {0}")]
    Covering(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("non-unique successor for member {member}: candidates {candidates:?}")]
    NonUniqueSuccessor { member: usize, candidates: Vec<usize> },
    #[error("successor cycle through member {0}")]
    Cycle(usize),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("witness rejected at {path}: {reason}")]
    Witness { path: String, reason: String },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("supports overlap: {0}")]
    Overlap(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
