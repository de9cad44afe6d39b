use std::path::PathBuf;

use thiserror::Error;

use crate::atcn::FormatError;

#[derive(Debug, Error)]
pub enum DiacriticsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown language code {0:?}")]
    UnknownLanguage(String),
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),
    #[error("line {line}: reference has {reference} characters but hypothesis has {hypothesis}")]
    LengthMismatch {
        line: usize,
        reference: usize,
        hypothesis: usize,
    },
    #[error("training diverged at epoch {epoch}, step {step}: loss is not finite")]
    Divergence { epoch: usize, step: usize },
    #[error(transparent)]
    Kernel(#[from] nnkernel::KernelError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DiacriticsError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DiacriticsError::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DiacriticsError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = DiacriticsError> = std::result::Result<T, E>;
