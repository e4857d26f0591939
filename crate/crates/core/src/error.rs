use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MidaError {
    #[error("empty sample")]
    EmptySample,
    #[error("non-finite input at position {0}")]
    NonFinite(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate labels: at least two classes are required")]
    DegenerateLabels,
    #[error("uninformative feature set: every feature has zero mutual information with the label")]
    UninformativeFeatures,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge (n = {n}, max_iter = {max_iter})")]
    NoConvergence { n: usize, max_iter: usize },
    #[error("regularized matrix is not positive definite (shift {shift:e}, n = {n})")]
    NotPositiveDefinite { shift: f64, n: usize },
    #[error("{path}: file not found")]
    MissingFile { path: PathBuf },
    #[error("{path}: empty file")]
    EmptyFile { path: PathBuf },
    #[error("{path}:{line}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        column: usize,
        value: String,
    },
    #[error("{path}: label column {column} not found")]
    MissingLabelColumn { path: PathBuf, column: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = MidaError> = std::result::Result<T, E>;
