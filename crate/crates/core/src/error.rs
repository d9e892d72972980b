use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the BFCS library.
#[derive(Debug, Error)]
pub enum BfcsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("correlation {name} = {value} lies outside [-1, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("singular correlation matrix: det(R) = {det:e} is at or below the floor {floor:e}")]
    SingularCorrelation { det: f64, floor: f64 },

    #[error("degenerate prior: every model with nonzero prior mass has zero evidence")]
    DegeneratePrior,

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column '{column}' is constant (zero variance)")]
    ConstantColumn { column: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("empty scan: {0}")]
    EmptyScan(String),

    #[error(
        "too many edges: requested {requested}, at most {max} fit in a {genes}-gene lower triangle"
    )]
    TooManyEdges {
        requested: usize,
        max: usize,
        genes: usize,
    },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BfcsError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BfcsError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        BfcsError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Broad category of the failure, used by front ends to choose exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            BfcsError::InvalidConfig(_) | BfcsError::TooManyEdges { .. } => ErrorKind::Usage,
            BfcsError::OutOfRange { .. }
            | BfcsError::SingularCorrelation { .. }
            | BfcsError::DegeneratePrior
            | BfcsError::EmptyScan(_) => ErrorKind::Numerical,
            BfcsError::Io { .. } => ErrorKind::Io,
            _ => ErrorKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
    Io,
}

pub type Result<T, E = BfcsError> = std::result::Result<T, E>;
