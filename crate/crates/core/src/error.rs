use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{path}: parse error at row {row}, column {col}: {msg}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        msg: String,
    },

    #[error("label {label} out of range for {clusters} clusters")]
    LabelRange { label: usize, clusters: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    Numerical { what: &'static str, iterations: usize },

    #[error(
        "ill-conditioned Sylvester equation: alpha[{i}] + beta[{j}] = {alpha} + {beta} below tolerance {tol:e}"
    )]
    IllConditionedSylvester {
        i: usize,
        j: usize,
        alpha: f64,
        beta: f64,
        tol: f64,
    },

    #[error("ill-conditioned linear system: {0}")]
    IllConditioned(String),

    #[error("solver diverged at iteration {iteration} (last finite iterate: {last_good})")]
    Divergence { iteration: usize, last_good: usize },

    #[error("degenerate bandwidth: median k-NN distance is zero")]
    DegenerateBandwidth,

    #[error("{path}: {source}")]
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
}
