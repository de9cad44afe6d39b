use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch in {dimension}: expected {expected}, got {actual}")]
    ShapeMismatch {
        dimension: String,
        expected: usize,
        actual: usize,
    },
}

impl KernelError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        KernelError::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(dimension: impl Into<String>, expected: usize, actual: usize) -> Self {
        KernelError::ShapeMismatch {
            dimension: dimension.into(),
            expected,
            actual,
        }
    }
}

pub type Result<T, E = KernelError> = std::result::Result<T, E>;
