use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mask out of bounds: mask {mask:?} does not fit a {width}x{height} frame")]
    MaskOutOfBounds {
        mask: (i32, i32, u32, u32),
        width: usize,
        height: usize,
    },

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    #[error("feature dimension mismatch: model expects {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("missing ground truth: {0}")]
    MissingGroundTruth(String),

    #[error("instance too large for brute force: {vars} variables (limit {limit})")]
    TooManyVariables { vars: usize, limit: usize },

    #[error("solution is infeasible: {0}")]
    InfeasibleSolution(String),

    #[error("solver stopped at the time limit before finding any feasible assignment")]
    NoIncumbent,

    #[error("{what} at byte {offset}")]
    Format { what: String, offset: usize },

    #[error("unsupported {format} version {found}; supported versions: {supported:?}")]
    Version {
        format: String,
        found: u32,
        supported: Vec<u32>,
    },

    #[error("invalid track table: {0}")]
    Tracks(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: impl Into<String>, offset: usize) -> Self {
        Error::Format {
            what: what.into(),
            offset,
        }
    }
}
