use std::path::PathBuf;

use netgame_core::Error as CoreError;

/// Process exit codes.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] CoreError),

    /// The run finished but the optimiser did not meet its convergence test.
    #[error("{0}")]
    NotConverged(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::NotConverged(_) => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(e) => match e {
                CoreError::Io { .. } => EXIT_IO,
                CoreError::Csv { source, .. } if source.is_io_error() => EXIT_IO,
                CoreError::NoMatchingWindow { .. } => EXIT_NUMERICAL,
                e if e.is_numerical() => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            },
        }
    }
}

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
