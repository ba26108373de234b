//! Post-processing: affinity from the coefficient matrix, spectral
//! clustering, and agreement metrics against ground truth.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

mod kmeans;
mod metrics;
mod spectral;

pub use kmeans::{kmeans, KMeansConfig, KMeansResult};
pub use metrics::{acc, contingency, hungarian_max, nmi, pairwise_fscore, same_partition};
pub use spectral::{spectral_cluster, spectral_embedding};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub m: usize,
    pub affinity: Option<DenseMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricTriple {
    pub nmi: f64,
    pub acc: f64,
    pub fscore: f64,
}

impl MetricTriple {
    pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<Self> {
        Ok(Self {
            nmi: nmi(pred, truth)?,
            acc: acc(pred, truth)?,
            fscore: pairwise_fscore(pred, truth)?,
        })
    }
}

/// `W = (|C| + |Cᵀ|) / 2`.
pub fn build_affinity(c: &DenseMatrix) -> Result<DenseMatrix> {
    if !c.is_square() {
        return Err(Error::Shape(format!(
            "affinity needs a square coefficient matrix, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    let n = c.nrows();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        0.5 * (c[(i, j)].abs() + c[(j, i)].abs())
    }))
}
