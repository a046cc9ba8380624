use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient frames: need at least {needed} samples, got {got}")]
    InsufficientFrames { needed: usize, got: usize },

    #[error("unvoiced input: no voiced frames found")]
    UnvoicedInput,

    #[error("scale out of supported range: {0} (allowed [0.25, 4])")]
    ScaleOutOfRange(f64),

    #[error("formant factor out of range: {0} (allowed [0.5, 2])")]
    BetaOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("gender unresolved for {0}")]
    GenderUnresolved(String),

    #[error("{path}: missing required column '{column}'")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: row {row}: {message}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: duplicate id '{id}' at rows {first_row} and {second_row}")]
    DuplicateId {
        path: PathBuf,
        id: String,
        first_row: usize,
        second_row: usize,
    },

    #[error("{path}: unsupported audio format: {message}")]
    UnsupportedAudio { path: PathBuf, message: String },

    #[error("{path}: slice [{offset:.3}s, {end:.3}s) exceeds audio extent of {extent:.3}s")]
    SliceOutOfRange {
        path: PathBuf,
        offset: f64,
        end: f64,
        extent: f64,
    },

    #[error("empty reference")]
    EmptyReference,

    #[error("no segments in group {0}")]
    EmptyGroup(String),

    #[error("baseline WER must be positive, got {0}")]
    ZeroBaseline(f64),

    #[error("segment ids do not match at position {index}: '{baseline}' vs '{system}'")]
    MismatchedIds {
        index: usize,
        baseline: String,
        system: String,
    },

    #[error("{path}: no entry for id '{id}'")]
    MissingId { path: PathBuf, id: String },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn wav(path: impl Into<PathBuf>, source: hound::Error) -> Self {
        match source {
            hound::Error::IoError(e) => Error::io(path, e),
            other => Error::Wav {
                path: path.into(),
                source: other,
            },
        }
    }
}
