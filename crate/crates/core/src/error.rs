use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("block shape: {block} block has {actual} landmarks, expected {expected}")]
    BlockShape {
        block: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("label {index} out of range for {num_classes} classes")]
    Label { index: usize, num_classes: usize },

    #[error("unknown class `{0}`")]
    UnknownClass(String),

    #[error("format: {0}")]
    Format(String),

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("corrupt model: {0}")]
    CorruptModel(String),

    #[error("architecture: {0}")]
    Architecture(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config: {0}")]
    Config(String),

    #[error("input: {0}")]
    Input(String),

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("frame timestamp {got} ms precedes previous frame at {previous} ms")]
    Ordering { previous: u64, got: u64 },

    #[error("protocol: {0}")]
    Protocol(String),

    #[error("{}: {source}", path.display())]
    AtPath {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::AtPath {
            path: path.into(),
            source: Box::new(source),
        }
    }

    /// The innermost error, skipping path annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPath { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures caused by input files, datasets or models, as opposed
    /// to failures that happen while computing or serving.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self.root(),
            Error::Divergence { .. } | Error::Protocol(_) | Error::Ordering { .. }
        )
    }
}
