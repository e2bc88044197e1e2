use std::path::PathBuf;

use thiserror::Error;

use crate::adaptive::NonConvergence;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate cost matrix: {0}")]
    DegenerateCost(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("logic error: {0}")]
    Logic(String),

    #[error("unsupported model format version {found} (supported: {supported})")]
    FormatVersion { found: u64, supported: u64 },

    #[error("malformed model document: {0}")]
    Parse(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("no feasible operating point: {0}")]
    Infeasible(String),

    #[error("{0}")]
    NonConvergence(Box<NonConvergence>),

    #[error("ingestion error in {path}: {message}")]
    Ingest { path: PathBuf, message: String },

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("sweep failed in cell (feature_fraction={feature_fraction}, budget_fraction={budget_fraction}), run {run}: {source}")]
    Sweep {
        feature_fraction: f64,
        budget_fraction: f64,
        run: usize,
        #[source]
        source: Box<Error>,
    },

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
