use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{n_qubits} qubits exceeds the supported maximum of {max}")]
    TooManyQubits { n_qubits: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver failed to converge")]
    EigenConvergence,

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("backward pass called with a stale or mismatched forward cache")]
    StaleCache,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("could not draw a pair: {0}")]
    Sampling(String),

    #[error("class {class} has {available} images, {required} required")]
    InsufficientClass { class: usize, available: usize, required: usize },

    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("row {row}, field {field}: not a number ({text:?})")]
    NonNumeric { row: usize, field: usize, text: String },

    #[error("row {row}: invalid label {label}")]
    BadLabel { row: usize, label: String },

    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u16),

    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
