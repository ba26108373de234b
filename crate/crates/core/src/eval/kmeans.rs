//! Seeded Lloyd's k-means with k-means++ initialisation and restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the inertia improves by less than this fraction.
    pub rel_tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 300,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    /// `k × dim`, one centroid per row.
    pub centroids: DenseMatrix,
    pub inertia: f64,
}

fn sq_dist(points: &DenseMatrix, i: usize, centroids: &DenseMatrix, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centroids.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Nearest centroid, lowest index on ties.
fn nearest(points: &DenseMatrix, i: usize, centroids: &DenseMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.nrows() {
        let d = sq_dist(points, i, centroids, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &DenseMatrix, k: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let (n, dim) = points.shape();
    let mut centroids = DenseMatrix::zeros(k, dim);
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from(&points.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centroids, 0)).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in closest.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from(&points.row(pick));
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centroids, c));
        }
    }
    centroids
}

fn lloyd(points: &DenseMatrix, mut centroids: DenseMatrix, config: &KMeansConfig) -> KMeansResult {
    let (n, dim) = points.shape();
    let k = centroids.nrows();
    let mut labels = vec![0usize; n];
    let mut inertia = f64::INFINITY;
    for _ in 0..config.max_iter {
        let mut new_inertia = 0.0;
        for (i, label) in labels.iter_mut().enumerate() {
            let (c, d) = nearest(points, i, &centroids);
            *label = c;
            new_inertia += d;
        }

        let mut sums = DenseMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += points.row(i);
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let mean = sums.row(c) / count as f64;
                centroids.row_mut(c).copy_from(&mean);
            } else {
                // re-seed an empty cluster at the worst-fit point
                let (far, _) = (0..n)
                    .map(|i| (i, sq_dist(points, i, &centroids, labels[i])))
                    .fold((0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
                centroids.row_mut(c).copy_from(&points.row(far));
            }
        }

        let converged = inertia.is_finite() && (inertia - new_inertia) <= config.rel_tol * inertia;
        inertia = new_inertia;
        if converged {
            break;
        }
    }
    // final assignment against the last centroids
    let mut final_inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let (c, d) = nearest(points, i, &centroids);
        *label = c;
        final_inertia += d;
    }
    KMeansResult {
        labels,
        centroids,
        inertia: final_inertia,
    }
}

/// Clusters the rows of `points` into `k` groups, keeping the restart with
/// the lowest within-cluster sum of squares.
pub fn kmeans(points: &DenseMatrix, k: usize, seed: u64, config: &KMeansConfig) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot form {k} clusters from {n} points"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..config.restarts.max(1) {
        let init = plus_plus_init(points, k, &mut rng);
        let run = lloyd(points, init, config);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::same_partition;

    #[test]
    fn separates_obvious_blobs() {
        let pts = DenseMatrix::from_row_slice(
            6,
            2,
            &[0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 5.0, 5.0, 5.1, 5.0, 5.0, 5.1],
        );
        let r = kmeans(&pts, 2, 3, &KMeansConfig::default()).unwrap();
        assert!(same_partition(&r.labels, &[0, 0, 0, 1, 1, 1]));
        assert!(r.inertia < 0.1);
    }

    #[test]
    fn too_many_clusters() {
        let pts = DenseMatrix::zeros(3, 2);
        assert!(kmeans(&pts, 4, 0, &KMeansConfig::default()).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let pts = DenseMatrix::from_fn(30, 3, |i, j| ((i * 3 + j) as f64 * 0.7).sin());
        let a = kmeans(&pts, 4, 11, &KMeansConfig::default()).unwrap();
        let b = kmeans(&pts, 4, 11, &KMeansConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
