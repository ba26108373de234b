use super::kmeans::{kmeans, KMeansConfig};
use super::ClusteringResult;
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, sym_eigen, symmetrize, DenseMatrix};

/// Row-normalised eigenvectors of `L_sym = I - D^{-1/2} W D^{-1/2}` for the
/// `m` smallest eigenvalues, one sample per row. Isolated nodes get a unit
/// degree; all-zero embedding rows stay zero.
pub fn spectral_embedding(w: &DenseMatrix, m: usize) -> Result<DenseMatrix> {
    if !w.is_square() {
        return Err(Error::Shape(format!(
            "affinity must be square, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    ensure_finite(w, "affinity")?;
    let n = w.nrows();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "cannot embed {n} samples into {m} clusters"
        )));
    }
    if w.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidInput("affinity has negative entries".into()));
    }
    let inv_sqrt: Vec<f64> = w
        .row_iter()
        .map(|r| {
            let d = r.sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let l_sym = DenseMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]
    });
    let (_, vectors) = sym_eigen(&symmetrize(&l_sym))?;
    let mut embedding = vectors.columns(0, m).into_owned();
    for mut row in embedding.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(embedding)
}

/// Normalised spectral clustering: embedding from [`spectral_embedding`],
/// then seeded k-means (k-means++, 20 restarts) on its rows.
pub fn spectral_cluster(w: &DenseMatrix, m: usize, seed: u64) -> Result<ClusteringResult> {
    let n = w.nrows();
    if m < 1 || m > n {
        return Err(Error::InvalidParameter(format!(
            "cluster count {m} must be in 1..={n}"
        )));
    }
    let embedding = spectral_embedding(w, m)?;
    let km = kmeans(&embedding, m, seed, &KMeansConfig::default())?;
    Ok(ClusteringResult {
        labels: km.labels,
        m,
        affinity: Some(w.clone()),
    })
}
