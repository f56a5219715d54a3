use std::path::PathBuf;

use thiserror::Error;

/// Broad classification used by the CLI and the C ABI to pick exit/status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or missing input, bad arguments.
    Input,
    /// The input parsed but carries no usable data.
    NoData,
    /// A computation could not produce a defined result.
    Computation,
}

#[derive(Error, Debug)]
pub enum Error {
    #[error("no data")]
    NoData,

    #[error("world trade total is zero")]
    ZeroWorldTotal,

    #[error("line {line}: {message}")]
    BadRow { line: u64, message: String },

    #[error("unexpected header {found:?}, expected {expected:?}")]
    BadHeader { found: String, expected: String },

    #[error("duplicate entry ({country}, {product}) in year {year}")]
    DuplicateEntry {
        country: String,
        product: String,
        year: i32,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("nothing to iterate: matrix has no edges")]
    NothingToIterate,

    #[error("level {level} out of range (trajectory depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("insufficient overlap: {found} countries in common, need at least {needed}")]
    InsufficientOverlap { found: usize, needed: usize },

    #[error("design matrix is rank deficient: column {column:?} is collinear with {with:?}")]
    Collinear { column: String, with: Vec<String> },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoData | Error::ZeroWorldTotal => ErrorKind::NoData,
            Error::BadRow { .. }
            | Error::BadHeader { .. }
            | Error::DuplicateEntry { .. }
            | Error::InvalidArgument(_)
            | Error::InvalidMatrix(_)
            | Error::LevelOutOfRange { .. }
            | Error::Config(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => ErrorKind::Input,
            Error::NothingToIterate
            | Error::Degenerate(_)
            | Error::InsufficientOverlap { .. }
            | Error::Collinear { .. } => ErrorKind::Computation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
