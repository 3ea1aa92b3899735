use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry #{index} at ({row}, {col}) is outside a {nrows}x{ncols} matrix")]
    EntryOutOfRange {
        index: usize,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("{op}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),

    #[error("product pattern is missing structurally required entry ({row}, {col})")]
    MissingPatternEntry { row: usize, col: usize },

    #[error("zero diagonal entry in row {row}{}", level.map(|l| format!(" on level {l}")).unwrap_or_default())]
    ZeroDiagonal { row: usize, level: Option<usize> },

    #[error("coarsening stalled on level {level} at {size} unknowns, too large for the direct solver (limit {limit})")]
    CoarseningStalled {
        level: usize,
        size: usize,
        limit: usize,
    },

    #[error("matrix of size {size} exceeds the direct solver limit {limit}")]
    TooLargeForDirectSolve { size: usize, limit: usize },

    #[error("matrix is singular to working precision (zero pivot in column {column})")]
    Singular { column: usize },

    #[error("partial update impossible, full rebuild required: hierarchy has {expected} unknowns, new matrix has {found}")]
    PartialUpdateImpossible { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: unsupported Matrix Market format: {what}", path.display())]
    UnsupportedFormat { path: PathBuf, what: String },

    #[error("sequence: {0}")]
    Sequence(String),

    #[error("{}: {source}", path.display())]
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

    /// Attach a hierarchy level to a zero-diagonal error.
    pub(crate) fn at_level(self, level: usize) -> Self {
        match self {
            Error::ZeroDiagonal { row, .. } => Error::ZeroDiagonal {
                row,
                level: Some(level),
            },
            other => other,
        }
    }
}
