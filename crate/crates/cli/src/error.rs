use std::path::PathBuf;

use diacritics::DiacriticsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or missing flags detected after parsing; exit code 1.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] DiacriticsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{what}: invalid UTF-8 at byte offset {offset}")]
    Utf8 { what: String, offset: u64 },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
