//! Multi-view subspace clustering on concatenated features.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense primitives (column-wise ℓ2,1 shrinkage, singular value
//!   thresholding, symmetric Sylvester solves, norms).
//! - [`dataset`]: multi-view data model, CSV loading, per-feature min-max
//!   normalisation, feature concatenation and a synthetic generator.
//! - [`graph`]: per-view k-NN Gaussian graphs and unnormalised Laplacians.
//! - [`solver`]: the LRR baseline, FCMSC and graph-regularised FCMSC, all
//!   driven by an inexact augmented Lagrangian loop.
//! - [`eval`]: affinity construction, normalised spectral clustering and the
//!   NMI / ACC / pairwise F-score metrics.
//!
//! Matrices are [`nalgebra::DMatrix<f64>`] (column-major). Data matrices are
//! stored features × samples, so a sample is a column.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod linalg;
pub mod pipeline;
pub mod solver;

pub use dataset::{concatenate, load_views, normalize_view, JointRepresentation, MultiViewDataset};
pub use error::{Error, Result};
pub use eval::{acc, build_affinity, nmi, pairwise_fscore, spectral_cluster, ClusteringResult, MetricTriple};
pub use graph::{knn_adjacency, laplacian, Bandwidth, ViewGraph};
pub use linalg::DenseMatrix;
pub use solver::{fcmsc_solve, grfcmsc_solve, lrr_solve, LrrResult, SolverConfig, SolverState};
