use thiserror::Error;

/// Errors produced by the automaton engines, the optimizer and the file formats.
#[derive(Debug, Error)]
pub enum DcaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("cell {cell} left the simplex (sum = {sum:e})")]
    SimplexViolation { cell: usize, sum: f64 },

    #[error("non-finite {what} at iteration {iteration} (weight index {index:?}): {value}")]
    NonFinite {
        what: &'static str,
        iteration: usize,
        index: Option<usize>,
        value: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DcaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DcaError::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        DcaError::Parse {
            line,
            message: msg.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DcaError::SimplexViolation { .. } | DcaError::NonFinite { .. }
        )
    }
}

pub type Result<T, E = DcaError> = std::result::Result<T, E>;

pub(crate) fn ensure_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(DcaError::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
