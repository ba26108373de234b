//! Union-of-subspaces multi-view generator with the two corruption types the
//! model separates: cluster-specific (a view that "votes" for the wrong
//! cluster) and sample-specific (a whole column replaced by noise).

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::MultiViewDataset;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

// Independent RNG streams so that switching a corruption knob never perturbs
// the clean draw.
const STREAM_BASE: u64 = 0;
const STREAM_CLUSTER_CORRUPTION: u64 = 1;
const STREAM_SAMPLE_CORRUPTION: u64 = 2;

/// Standard deviation of sample-specific corruption entries, relative to the
/// typical entry magnitude `sqrt(rank / d_i)` of a clean column.
pub const SAMPLE_CORRUPTION_SCALE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub clusters: usize,
    pub n_per_cluster: usize,
    /// Feature dimension of each view; its length is the view count.
    pub dims: Vec<usize>,
    pub subspace_rank: usize,
    pub noise_level: f64,
    pub cluster_corruption_fraction: f64,
    pub sample_corruption_fraction: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn n_samples(&self) -> usize {
        self.clusters * self.n_per_cluster
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.clusters == 0 || self.n_per_cluster == 0 {
            return bad("cluster count and samples per cluster must be positive".into());
        }
        if self.dims.is_empty() {
            return bad("at least one view is required".into());
        }
        let min_dim = *self.dims.iter().min().unwrap();
        if self.subspace_rank == 0 || self.subspace_rank >= min_dim {
            return bad(format!(
                "subspace rank {} must be in 1..{min_dim}",
                self.subspace_rank
            ));
        }
        if !(self.noise_level >= 0.0) || !self.noise_level.is_finite() {
            return bad(format!("noise level {} must be >= 0", self.noise_level));
        }
        for (name, f) in [
            ("cluster corruption fraction", self.cluster_corruption_fraction),
            ("sample corruption fraction", self.sample_corruption_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("{name} {f} outside [0, 1]"));
            }
        }
        if self.cluster_corruption_fraction > 0.0 && self.clusters < 2 {
            return bad("cluster-specific corruption needs at least two clusters".into());
        }
        Ok(())
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn orthonormal_basis(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    gaussian(dim, rank, rng).qr().q()
}

fn fraction_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).floor() as usize).min(n)
}

/// Draws a labelled multi-view dataset from a union of subspaces.
///
/// Every view has its own orthonormal basis per cluster. A sample's latent
/// coefficient vector is drawn uniformly from the unit sphere and shared by
/// all views, so each cluster spans a
/// `subspace_rank`-dimensional subspace of the concatenated feature space.
/// Samples are ordered cluster by cluster.
///
/// Cluster-specific corruption picks exactly `floor(f * n)` samples and, for
/// each, one random view whose features are re-synthesised from a wrong
/// cluster's basis (same coefficients, same noise). Sample-specific corruption
/// replaces `floor(f * n)` columns of every view with large Gaussian noise.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MultiViewDataset> {
    spec.validate()?;
    let m = spec.clusters;
    let n = spec.n_samples();
    let r = spec.subspace_rank;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(STREAM_BASE);

    let bases: Vec<Vec<DenseMatrix>> = spec
        .dims
        .iter()
        .map(|&d| (0..m).map(|_| orthonormal_basis(d, r, &mut rng)).collect())
        .collect();
    let mut coefficients = gaussian(r, n, &mut rng);
    for mut col in coefficients.column_iter_mut() {
        col.normalize_mut();
    }
    let noise: Vec<DenseMatrix> = spec
        .dims
        .iter()
        .map(|&d| gaussian(d, n, &mut rng) * spec.noise_level)
        .collect();
    let labels: Vec<usize> = (0..n).map(|j| j / spec.n_per_cluster).collect();

    let synth_column = |view: usize, cluster: usize, j: usize| {
        &bases[view][cluster] * coefficients.column(j) + noise[view].column(j)
    };

    let mut views: Vec<DenseMatrix> = spec
        .dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut x = DenseMatrix::zeros(d, n);
            for (j, &label) in labels.iter().enumerate() {
                x.column_mut(j).copy_from(&synth_column(i, label, j));
            }
            x
        })
        .collect();

    let n_cluster_corrupt = fraction_count(spec.cluster_corruption_fraction, n);
    if n_cluster_corrupt > 0 {
        let mut crng = ChaCha8Rng::seed_from_u64(spec.seed);
        crng.set_stream(STREAM_CLUSTER_CORRUPTION);
        let mut picked = sample(&mut crng, n, n_cluster_corrupt).into_vec();
        picked.sort_unstable();
        for j in picked {
            let view = crng.random_range(0..spec.dims.len());
            let offset = crng.random_range(1..m);
            let wrong = (labels[j] + offset) % m;
            views[view].column_mut(j).copy_from(&synth_column(view, wrong, j));
        }
    }

    let n_sample_corrupt = fraction_count(spec.sample_corruption_fraction, n);
    if n_sample_corrupt > 0 {
        let mut srng = ChaCha8Rng::seed_from_u64(spec.seed);
        srng.set_stream(STREAM_SAMPLE_CORRUPTION);
        for (view, &d) in views.iter_mut().zip(&spec.dims) {
            let scale = SAMPLE_CORRUPTION_SCALE * (r as f64 / d as f64).sqrt();
            let mut picked = sample(&mut srng, n, n_sample_corrupt).into_vec();
            picked.sort_unstable();
            for j in picked {
                let col = gaussian(d, 1, &mut srng) * scale;
                view.column_mut(j).copy_from(&col);
            }
        }
    }

    MultiViewDataset::new(views, Some(labels))
}
