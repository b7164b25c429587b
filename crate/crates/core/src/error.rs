use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate key: recording {recording_id}, track {track_id}")]
    DuplicateKey { recording_id: i64, track_id: i64 },

    #[error("velocity sequence is all zero; orientation is undefined")]
    StationaryTrajectory,

    #[error("no valid split: {0}")]
    NoValidSplit(String),

    #[error("no similar data within the cutoff radius ({candidates} candidates)")]
    NoSimilarData { candidates: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("horizon {0} steps is not stored in the database")]
    UnknownHorizon(usize),

    #[error("missing horizons: {0:?}")]
    MissingHorizons(Vec<usize>),

    #[error("database has no other-vehicle annotations")]
    MissingSituations,

    #[error("format error: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl Error {
    /// Stable numeric code per error kind, used as the process exit status
    /// and across the C interface.
    pub fn code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 3,
            Error::Parse { .. } => 4,
            Error::DuplicateKey { .. } => 5,
            Error::StationaryTrajectory => 6,
            Error::NoValidSplit(_) => 7,
            Error::NoSimilarData { .. } => 8,
            Error::Empty(_) => 9,
            Error::UnknownHorizon(_) => 10,
            Error::MissingHorizons(_) => 11,
            Error::MissingSituations => 12,
            Error::Format(_) => 13,
            Error::Io { .. } => 14,
            Error::Csv(_) => 15,
        }
    }
}
