//! End-to-end clustering methods: normalise, concatenate, solve, build the
//! affinity, cluster and score.

use std::fmt;
use std::str::FromStr;

use crate::dataset::{concatenate, normalize_view, MultiViewDataset};
use crate::error::{Error, Result};
use crate::eval::{build_affinity, spectral_cluster, MetricTriple};
use crate::graph::{view_graphs, Bandwidth};
use crate::linalg::DenseMatrix;
use crate::solver::{fcmsc_solve, grfcmsc_solve, lrr_solve, SolverConfig, SolverState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// LRR on every single view, best view by NMI.
    LrrBsv,
    /// LRR on the concatenated features.
    LrrFc,
    Fcmsc,
    GrFcmsc,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::LrrBsv, Method::LrrFc, Method::Fcmsc, Method::GrFcmsc];

    pub fn name(self) -> &'static str {
        match self {
            Method::LrrBsv => "LRR_BSV",
            Method::LrrFc => "LRR_FC",
            Method::Fcmsc => "FCMSC",
            Method::GrFcmsc => "grFCMSC",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s) || m.name().replace('_', "").eq_ignore_ascii_case(&s.replace(['_', '-'], "")))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// Everything a method needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    pub solver: SolverConfig,
    /// Nuclear-norm weight of the LRR baselines.
    pub lrr_lambda: f64,
    pub knn: usize,
    pub sigma: Bandwidth,
    pub clusters: usize,
    /// Seeds the solver's `Z` initialisation and the k-means restarts.
    pub seed: u64,
}

/// Solver diagnostics of one run (per view for LRR_BSV, the selected view).
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// `[r1, r2, r3]` for FCMSC-type methods, `[r1, ||Z - J||]` style pair
    /// padded with zero for LRR.
    pub final_residuals: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    pub labels: Vec<usize>,
    pub metrics: Option<MetricTriple>,
    pub diagnostics: Diagnostics,
    /// View chosen by LRR_BSV.
    pub best_view: Option<usize>,
    /// Full solver state for FCMSC-type methods.
    pub state: Option<SolverState>,
    pub affinity: DenseMatrix,
}

/// View index, labels, diagnostics, affinity and metrics of the best view so far.
type BestView = (usize, Vec<usize>, Diagnostics, DenseMatrix, Option<MetricTriple>);

fn score(labels: &[usize], truth: Option<&[usize]>) -> Result<Option<MetricTriple>> {
    truth.map(|t| MetricTriple::evaluate(labels, t)).transpose()
}

fn lrr_on(x: &DenseMatrix, params: &MethodParams) -> Result<(Vec<usize>, Diagnostics, DenseMatrix)> {
    let res = lrr_solve(x, params.lrr_lambda, &params.solver)?;
    let affinity = build_affinity(&res.z)?;
    let clustering = spectral_cluster(&affinity, params.clusters, params.seed)?;
    let r1 = crate::linalg::inf_norm(&(x - x * &res.z - &res.e_x));
    Ok((
        clustering.labels,
        Diagnostics {
            iterations: res.iters,
            converged: res.converged,
            final_residuals: [r1, 0.0, 0.0],
        },
        affinity,
    ))
}

fn from_state(
    method: Method,
    state: SolverState,
    params: &MethodParams,
    truth: Option<&[usize]>,
) -> Result<MethodOutcome> {
    let affinity = build_affinity(&state.c)?;
    let clustering = spectral_cluster(&affinity, params.clusters, params.seed)?;
    let r = state.residuals;
    Ok(MethodOutcome {
        method,
        metrics: score(&clustering.labels, truth)?,
        labels: clustering.labels,
        diagnostics: Diagnostics {
            iterations: state.iter,
            converged: state.converged,
            final_residuals: [r.r1, r.r2, r.r3],
        },
        best_view: None,
        state: Some(state),
        affinity,
    })
}

/// Runs one method end to end. Metrics are filled in when the dataset
/// carries labels.
pub fn run_method(dataset: &MultiViewDataset, method: Method, params: &MethodParams) -> Result<MethodOutcome> {
    let mut solver = params.solver.clone();
    solver.seed = params.seed;
    let params = &MethodParams {
        solver,
        ..params.clone()
    };
    let truth = dataset.labels();
    match method {
        Method::LrrBsv => {
            let mut best: Option<BestView> = None;
            for (i, view) in dataset.views().iter().enumerate() {
                let x = normalize_view(view)?;
                let (labels, diag, affinity) = lrr_on(&x, params)?;
                let metrics = score(&labels, truth)?;
                let better = match (&best, metrics) {
                    (None, _) => true,
                    (Some((_, _, _, _, Some(b))), Some(m)) => m.nmi > b.nmi,
                    _ => false,
                };
                if better {
                    best = Some((i, labels, diag, affinity, metrics));
                }
            }
            let (view, labels, diagnostics, affinity, metrics) = best.expect("dataset has a view");
            Ok(MethodOutcome {
                method,
                labels,
                metrics,
                diagnostics,
                best_view: Some(view),
                state: None,
                affinity,
            })
        }
        Method::LrrFc => {
            let joint = concatenate(dataset, true)?;
            let (labels, diagnostics, affinity) = lrr_on(&joint.x, params)?;
            Ok(MethodOutcome {
                method,
                metrics: score(&labels, truth)?,
                labels,
                diagnostics,
                best_view: None,
                state: None,
                affinity,
            })
        }
        Method::Fcmsc => {
            let joint = concatenate(dataset, true)?;
            let state = fcmsc_solve(&joint, &params.solver)?;
            from_state(method, state, params, truth)
        }
        Method::GrFcmsc => {
            let joint = concatenate(dataset, true)?;
            let graphs = view_graphs(&joint.split(), params.knn, params.sigma)?;
            let state = grfcmsc_solve(&joint, &graphs, &params.solver)?;
            from_state(method, state, params, truth)
        }
    }
}
