use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error("{0}")]
    Crypto(String),
    #[error("{0}")]
    Abort(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::BadInput(_) => 2,
            CliError::Crypto(_) => 3,
            CliError::Abort(_) => 4,
        }
    }

    pub fn read(path: &Path, e: io::Error) -> Self {
        CliError::BadInput(format!("cannot read {}: {e}", path.display()))
    }

    pub fn write(path: &Path, e: io::Error) -> Self {
        CliError::BadInput(format!("cannot write {}: {e}", path.display()))
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
