use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A term or test function produced a non-finite value.
    #[error("evaluation failed at {point:?}: {reason}")]
    Evaluation { point: Vec<f64>, reason: String },

    #[error("no convergence in {what}: {detail}")]
    NonConvergence { what: String, detail: String },

    #[error("support overflow: {0}")]
    SupportOverflow(String),

    #[error("missing term: {0}")]
    MissingTerm(String),

    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unknown catalog term `{0}`")]
    UnknownTerm(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
