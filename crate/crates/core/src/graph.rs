//! Per-view similarity graphs for the Laplacian regulariser.

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, ensure_nonempty, DenseMatrix};

pub const DEFAULT_NEIGHBORS: usize = 5;

/// Gaussian kernel bandwidth for [`knn_adjacency`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// Median of all retained k-NN distances.
    #[default]
    Auto,
    Fixed(f64),
}

/// Adjacency, degree and unnormalised Laplacian `L = D - W` of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewGraph {
    pub w: DenseMatrix,
    pub d: DenseMatrix,
    pub l: DenseMatrix,
}

fn pairwise_sq_distances(view: &DenseMatrix) -> DenseMatrix {
    let n = view.ncols();
    let mut dist = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for k in (j + 1)..n {
            let d2 = (view.column(j) - view.column(k)).norm_squared();
            dist[(j, k)] = d2;
            dist[(k, j)] = d2;
        }
    }
    dist
}

/// k-nearest-neighbour graph with Gaussian weights `exp(-dist² / (2σ²))`,
/// symmetrised by `W = max(W, Wᵀ)` with a zero diagonal.
///
/// `view` is features × samples. Neighbour ties are broken by sample index.
pub fn knn_adjacency(view: &DenseMatrix, k: usize, sigma: Bandwidth) -> Result<DenseMatrix> {
    ensure_nonempty(view, "view")?;
    ensure_finite(view, "view")?;
    let n = view.ncols();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbour count must be in 1..{n}, got {k}"
        )));
    }
    if let Bandwidth::Fixed(s) = sigma {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {s}"
            )));
        }
    }

    let dist2 = pairwise_sq_distances(view);
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            let mut others: Vec<usize> = (0..n).filter(|&o| o != j).collect();
            others.sort_by(|&a, &b| dist2[(j, a)].total_cmp(&dist2[(j, b)]).then(a.cmp(&b)));
            others.truncate(k);
            others
        })
        .collect();

    let sigma = match sigma {
        Bandwidth::Fixed(s) => s,
        Bandwidth::Auto => {
            let mut d: Vec<f64> = neighbours
                .iter()
                .enumerate()
                .flat_map(|(j, nb)| nb.iter().map(move |&o| (j, o)))
                .map(|(j, o)| dist2[(j, o)].sqrt())
                .collect();
            d.sort_by(f64::total_cmp);
            let mid = d.len() / 2;
            let median = if d.len().is_multiple_of(2) {
                0.5 * (d[mid - 1] + d[mid])
            } else {
                d[mid]
            };
            if median <= 0.0 {
                return Err(Error::DegenerateBandwidth);
            }
            median
        }
    };

    let two_sigma2 = 2.0 * sigma * sigma;
    let mut w = DenseMatrix::zeros(n, n);
    for (j, nb) in neighbours.iter().enumerate() {
        for &o in nb {
            let weight = (-dist2[(j, o)] / two_sigma2).exp();
            if weight > w[(j, o)] {
                w[(j, o)] = weight;
            }
            if weight > w[(o, j)] {
                w[(o, j)] = weight;
            }
        }
    }
    w.fill_diagonal(0.0);
    Ok(w)
}

/// Degree matrix and unnormalised Laplacian of a symmetric, nonnegative,
/// zero-diagonal adjacency.
pub fn laplacian(w: &DenseMatrix) -> Result<ViewGraph> {
    if !w.is_square() {
        return Err(Error::Shape(format!(
            "adjacency must be square, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    ensure_nonempty(w, "adjacency")?;
    ensure_finite(w, "adjacency")?;
    let n = w.nrows();
    for j in 0..n {
        if w[(j, j)] != 0.0 {
            return Err(Error::InvalidInput(format!(
                "adjacency has a self loop at {j}"
            )));
        }
        for k in 0..n {
            if w[(j, k)] < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "adjacency has a negative weight at ({j}, {k})"
                )));
            }
            if (w[(j, k)] - w[(k, j)]).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "adjacency is not symmetric at ({j}, {k})"
                )));
            }
        }
    }
    let degrees = w.column_sum();
    let d = DenseMatrix::from_diagonal(&degrees);
    let l = &d - w;
    Ok(ViewGraph { w: w.clone(), d, l })
}

/// Builds one graph per view, each from the view's own features.
pub fn view_graphs(
    views: &[DenseMatrix],
    k: usize,
    sigma: Bandwidth,
) -> Result<Vec<ViewGraph>> {
    views
        .iter()
        .map(|v| laplacian(&knn_adjacency(v, k, sigma)?))
        .collect()
}
