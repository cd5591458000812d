use thiserror::Error;

/// Errors produced by learners, geometry routines and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OloError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<OloError>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl OloError {
    /// True when the error (or the error wrapped by a round marker) is a
    /// precondition violation on the gradient stream.
    pub fn is_precondition(&self) -> bool {
        match self {
            OloError::Precondition(_) | OloError::DimensionMismatch { .. } => true,
            OloError::Round { source, .. } => source.is_precondition(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for OloError {
    fn from(e: std::io::Error) -> Self {
        OloError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for OloError {
    fn from(e: serde_json::Error) -> Self {
        OloError::Config(e.to_string())
    }
}

impl From<csv::Error> for OloError {
    fn from(e: csv::Error) -> Self {
        OloError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, OloError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(OloError::DimensionMismatch { expected, got })
    }
}
