//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by event ingestion, grid binning, network construction,
/// and the analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file failed to parse; `line` is 1-based and counts the header.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unknown input format `{0}`")]
    UnknownFormat(String),

    #[error("event set is not sorted by timestamp")]
    UnsortedEvents,

    #[error("coordinates ({x}, {y}) fall outside the grid bounding box")]
    OutOfBounds { x: f64, y: f64 },

    #[error("cell id {0} is not valid for this grid")]
    InvalidCell(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph has no links")]
    NoLinks,

    #[error("{0}")]
    EmptyInput(String),

    #[error("trajectory produced a non-finite state at t = {time}")]
    Divergence { time: f64 },

    #[error("label propagation did not converge within {0} rounds")]
    NonConvergence(usize),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid run config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
