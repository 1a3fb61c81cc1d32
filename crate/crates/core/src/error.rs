use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("invalid label {0}: labels must be -1 or +1")]
    InvalidLabel(String),
    #[error("perceptron update budget of {budget} exceeded (data may not be separable)")]
    UpdateBudgetExceeded { budget: u64 },
    #[error("no violated constraint: the query point is already in the version space")]
    NoViolatedConstraint,
    #[error("index {index} out of range for dataset of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("compression set of size {scheme_size} leaves no points out of {n_total}")]
    DegenerateDenominator { n_total: usize, scheme_size: usize },
    #[error("hit-and-run chord collapsed {attempts} times in a row (empty interior?)")]
    ChordCollapse { attempts: usize },
    #[error("constraints are not strictly separable (max-min margin {margin:e})")]
    NotSeparable { margin: f64 },
    #[error("iteration limit {0} reached before convergence")]
    MaxIterExceeded(usize),
    #[error("every pool point has already been queried")]
    PoolExhausted,
    #[error("center is the zero vector")]
    ZeroCenter,
    #[error("no sample accepted out of {n}: volume below resolution")]
    ZeroAcceptance { n: usize },
    #[error("lambda {0} outside [0, 1)")]
    LambdaOutOfRange(f64),
    #[error("degenerate body: {0}")]
    DegenerateBody(&'static str),
    #[error("offset point lies outside the body")]
    OffsetOutsideBody,
    #[error("all points were pruned at margin {gamma}")]
    AllPruned { gamma: f64 },
    #[error("dataset unavailable: {}", .0.display())]
    DatasetUnavailable(PathBuf),
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
