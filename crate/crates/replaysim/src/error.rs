//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the simulation engine and its I/O layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signal is silent: {0}")]
    SilentSignal(&'static str),

    #[error("unsupported sample rate conversion {from} Hz -> {to} Hz")]
    UnsupportedRatePair { from: u32, to: u32 },

    #[error("source position {0:?} is not strictly inside the room")]
    SourceOutsideRoom([f64; 3]),

    #[error("coincident points: {0:?}")]
    CoincidentPoints([f64; 3]),

    #[error("zero-distance propagation path at {0:?}")]
    ZeroDistancePath([f64; 3]),

    #[error("insufficient decay range for RT60 fit: {0}")]
    InsufficientDecay(String),

    #[error("constraint set infeasible: {0}")]
    InfeasibleConstraints(String),

    #[error("scene sampling exceeded {0} rejections; constraint set looks infeasible")]
    SamplingRejected(u32),

    #[error("scored trials contain only one class")]
    SingleClass,

    #[error("need at least {needed} values, got {got}")]
    NotEnoughData { needed: usize, got: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed WAV file {path}: {reason}")]
    MalformedWav { path: PathBuf, reason: String },

    #[error("unsupported WAV encoding in {path}: {reason}")]
    UnsupportedWav { path: PathBuf, reason: String },

    #[error("bad directivity grid {path}: {reason}")]
    BadGrid { path: PathBuf, reason: String },

    #[error("bad manifest {path}: {reason}")]
    BadManifest { path: PathBuf, reason: String },

    #[error("bad score file {path}: {reason}")]
    BadScoreFile { path: PathBuf, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("score file references trials missing from the manifest: {0:?}")]
    UnmatchedTrials(Vec<String>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
