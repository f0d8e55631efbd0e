use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the movement-to-trait pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: column count mismatch: expected {expected}, found {found}")]
    ColumnCount {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: non-finite sample in column {column}")]
    NonFinite {
        path: PathBuf,
        line: usize,
        column: usize,
    },
    #[error("{path}:{line}: cannot parse `{token}` as a number")]
    Parse {
        path: PathBuf,
        line: usize,
        token: String,
    },
    #[error("too few frames: need at least {required}, got {found}")]
    TooFewFrames { required: usize, found: usize },
    #[error("invalid frame rate {0} Hz")]
    FrameRate(f64),
    #[error("cutoff {cutoff} Hz is not below the Nyquist frequency for {frame_rate} Hz sampling")]
    CutoffAboveNyquist { cutoff: f64, frame_rate: f64 },
    #[error("expected a {expected} take, got {found}")]
    Kind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("non-conformant take: expected {expected} markers, found {found}")]
    MarkerCount { expected: usize, found: usize },
    #[error("invalid skeleton map: {0}")]
    Skeleton(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("kernel width sigma must be positive, got {0}")]
    Sigma(f64),
    #[error("need at least {required} rows, got {found}")]
    TooFewRows { required: usize, found: usize },
    #[error("number of components k={k} out of range 1..={max}")]
    ComponentRange { k: usize, max: usize },
    #[error("degenerate design: {0}")]
    Degenerate(String),
    #[error("non-finite intermediate value in {0}")]
    IllConditioned(&'static str),
    #[error("missing target for participant `{0}`")]
    MissingTarget(String),
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
    #[error("invalid fold plan: {0}")]
    Folds(String),
    #[error("feature layout mismatch between models: {0}")]
    Layout(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
