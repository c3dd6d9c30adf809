use std::path::PathBuf;

use crate::solver::Solution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A Gram matrix (or a factor of one) is singular to working precision.
    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("format error at line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sketch with {rows} rows could not preserve the rank of a {n}x{d} matrix")]
    SketchTooSmall { rows: usize, n: usize, d: usize },

    #[error("degenerate row scale: denominator {denominator:e} for row {row}")]
    DegenerateScale { row: usize, denominator: f64 },

    #[error("prefix threshold {threshold} unreachable, total leverage {total}")]
    ThresholdUnreachable { threshold: f64, total: f64 },

    #[error("no certificate after {} iterations", .0.certificate.iterations)]
    MaxIterations(Box<Solution>),

    #[error("not primal feasible: max xi {max_xi} exceeds (1 + {delta}) * {d}")]
    NotFeasible { max_xi: f64, delta: f64, d: usize },

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
