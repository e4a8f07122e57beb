use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A confounder design or scenario whose solved probabilities leave (0, 1).
    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("degenerate margin: {0}")]
    DegenerateMargin(String),

    #[error("degenerate strata (need at least one infected and one uninfected individual): {}", .0.join(", "))]
    DegenerateStrata(Vec<String>),

    #[error("fold degeneracy: {0}")]
    FoldDegeneracy(String),

    #[error("solver did not converge after {sweeps} coordinate sweeps (lambda = {lambda})")]
    NonConvergence { lambda: f64, sweeps: usize },

    #[error("separation detected: |intercept| = {intercept:.3} exceeds cap {cap} (lambda = {lambda})")]
    Separation { lambda: f64, intercept: f64, cap: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Result is undefined for the given inputs (e.g. rank correlation of a constant vector).
    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{0}: file is empty")]
    EmptyFile(PathBuf),

    /// Every replicate of a study cell failed; carries the first failure.
    #[error("all replicates failed for scenario {scenario}, arm {arm}: {message}")]
    CellFailed { scenario: String, arm: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

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
