use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("bad cell at row {row}, column {column:?}: {value:?} ({reason})")]
    Cell {
        /// 1-based data row (the header is row 0).
        row: usize,
        column: String,
        value: String,
        reason: &'static str,
    },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column name {0:?} already exists")]
    DuplicateColumn(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("model parse error at line {line}: {msg}")]
    ModelParse { line: usize, msg: String },
    #[error("too many features for exact enumeration: {got} > {max}")]
    TooManyFeatures { got: usize, max: usize },
    #[error("index {index} out of range (n = {n})")]
    OutOfRange { index: usize, n: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
