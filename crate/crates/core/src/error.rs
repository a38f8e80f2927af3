use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("feature vector must have at least one coordinate")]
    EmptyVector,

    #[error("coordinate {index} = {value} is outside [0, 1]")]
    CoordinateOutOfRange { index: usize, value: f64 },

    #[error("label {0} is not binary")]
    NonBinaryLabel(f64),

    #[error("k = {k} is out of range for a dataset of size {n}")]
    InvalidK { k: usize, n: usize },

    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("row {row}: {message}")]
    InvalidRow { row: usize, message: String },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
