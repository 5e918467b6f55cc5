use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures split by exit code: 2 for I/O, 3 for bad input.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Invalid(_) => 3,
        }
    }
}

impl From<blockfade::Error> for CliError {
    fn from(e: blockfade::Error) -> Self {
        match e {
            blockfade::Error::Io { path, source } => CliError::Io { path, source },
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(Path::new("<stdout>"), e)
    }
}
