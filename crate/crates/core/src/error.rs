use std::path::PathBuf;

/// Errors produced by the network-game library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("player index {index} out of range for a network of {n} players")]
    PlayerOutOfRange { index: usize, n: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid probability row for player {player}: {reason}")]
    InvalidProfile { player: usize, reason: String },

    #[error("fixed point not reached after {iterations} iterations (last step {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("subnetwork solve centred at player {player} failed: {source}")]
    Subnetwork {
        player: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("no covariate window matches the window of player {player}")]
    NoMatchingWindow { player: usize },

    #[error("{path}: row {row}{}: {message}", column.as_ref().map(|c| format!(", column `{c}`")).unwrap_or_default())]
    Schema {
        path: PathBuf,
        row: usize,
        column: Option<String>,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures of an iterative numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotConverged { .. } | Error::Singular(_) => true,
            Error::Subnetwork { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
