use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not symmetric (max relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot:e} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error("degenerate design: column {column} is collinear with the active set at mu = {mu:e}")]
    DegenerateDesign { column: usize, mu: f64 },

    #[error("coordinate descent did not converge in {iterations} sweeps (last change {last_change:e})")]
    NotConverged { iterations: usize, last_change: f64 },

    #[error("sampled Gram matrix is numerically singular")]
    SingularGram,

    #[error("no model on the requested side of the consistency threshold after {0} draws")]
    NotFound(usize),

    #[error("consistency index undefined: every variable is relevant")]
    EmptyComplement,

    #[error("consistency index undefined: no relevant variable")]
    EmptySupport,

    #[error("no grid point yields a support of size {0}")]
    NoPatternOfSizeR(usize),

    #[error("ordinary least squares estimate is identically zero")]
    AllWeightsZero,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: parse error at record {record}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        record: usize,
        column: String,
        message: String,
    },

    #[error("target column {0} not found")]
    MissingTarget(String),

    #[error("non-numeric columns: {}", .0.join(", "))]
    NonNumericColumns(Vec<String>),

    #[error("all {0} rows were dropped because of missing values")]
    AllRowsDropped(usize),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Context { source, .. } => source.class(),
            Error::InvalidArgument(_) => ErrorClass::Usage,
            Error::NotSymmetric(_)
            | Error::NotPositiveDefinite { .. }
            | Error::DegenerateDesign { .. }
            | Error::NotConverged { .. }
            | Error::SingularGram
            | Error::NotFound(_)
            | Error::EmptyComplement
            | Error::EmptySupport
            | Error::NoPatternOfSizeR(_)
            | Error::AllWeightsZero => ErrorClass::Numerical,
            Error::DimensionMismatch(_)
            | Error::NonFinite(_)
            | Error::IndexOutOfRange { .. }
            | Error::Parse { .. }
            | Error::MissingTarget(_)
            | Error::NonNumericColumns(_)
            | Error::AllRowsDropped(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => ErrorClass::Data,
        }
    }

    /// Process exit code: 2 usage, 3 data, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Usage => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T, E: Into<Error>> ResultExt<T> for std::result::Result<T, E> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.into().context(context()))
    }
}
