use std::path::Path;

use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    /// Wraps an I/O or parse failure on `path` as a data error.
    pub fn at(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<qae_core::Error> for CliError {
    fn from(e: qae_core::Error) -> Self {
        use qae_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidSpec(_)
            | E::TooManyQubits(_)
            | E::InvalidProbability { .. }
            | E::ParamCount { .. }
            | E::UnsupportedVersion(_) => CliError::Config(msg),
            E::MissingColumn(_)
            | E::Parse(_)
            | E::NonFinite(_)
            | E::Empty(_)
            | E::Degenerate(_)
            | E::LengthMismatch { .. }
            | E::Io(_)
            | E::Csv(_)
            | E::Json(_) => CliError::Data(msg),
            _ => CliError::Runtime(msg),
        }
    }
}
