use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    Shape { row: usize, expected: usize, found: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("too few patterns: need at least {needed}, found {found}")]
    TooFewPatterns { needed: usize, found: usize },
    #[error("operation requires continuous targets, dataset is already signed")]
    AlreadySigned,
    #[error("operation requires signed (+1/-1) targets")]
    UnlabeledData,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("network is not initialized: {0}")]
    NotInitialized(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid sigma grid: {0}")]
    InvalidGrid(String),
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("malformed model text at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("model row `{model}`: {source}")]
    Model {
        model: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the user's configuration rather than by a
    /// failure while running a model.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Config { .. } | Error::InvalidConfig(_) | Error::InvalidGrid(_) => true,
            Error::Io { .. } | Error::Parse { .. } | Error::Shape { .. } => true,
            Error::Model { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
