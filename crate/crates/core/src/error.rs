use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed input file. `line` is the 1-based line in the file.
    #[error("{path}: line {line}, column {column}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: String,
        reason: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("all pairwise differences are zero, bandwidth is undefined")]
    DegenerateBandwidth,

    #[error("matrix is not symmetric: entries ({i}, {j}) and ({j}, {i}) differ by {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("coefficient {index} is negative ({value:e})")]
    Infeasible { index: usize, value: f64 },

    #[error("non-finite value in solver iterate at iteration {iteration}")]
    NumericalBreakdown { iteration: usize },

    #[error("eigendecomposition did not converge")]
    Eigendecomposition,

    #[error("dataset has no ground-truth feature set")]
    MissingTruth,
}
