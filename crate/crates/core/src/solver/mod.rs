//! Augmented Lagrangian solvers: the LRR baseline, FCMSC and gr-FCMSC.
//!
//! FCMSC solves
//!
//! ```text
//! min ||E_x||_{2,1} + λ1 ||E_z||_{2,1} + λ2 ||J||_*   (+ λ3 Σ_i tr(Cᵀ L_i C))
//! s.t. X = XZ + E_x,  Z = ZC + E_z,  C = J
//! ```
//!
//! by alternating closed-form updates of `E_x`, `Z`, `E_z`, `C`, `J` followed
//! by multiplier ascent with `μ ← min(ρμ, μ_max)`. The order of the sweep is
//! part of the reproducibility contract. Each iteration costs
//! `O(d n² + n³)` after a one-off `O(d n²)` Gram product; the Sylvester left
//! operator `XᵀX + I` is decomposed once per run.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

mod fcmsc;
mod lrr;
pub mod updates;

pub use fcmsc::{fcmsc_solve, grfcmsc_solve, objective_value, Mode};
pub use lrr::{lrr_solve, LrrResult};
pub use updates::{
    update_c, update_ex, update_ez, update_j, update_multipliers, update_z, GraphTerm, ZStep,
};

/// Infinity norms of the three constraint residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `||X - XZ - E_x||_inf`
    pub r1: f64,
    /// `||Z - ZC - E_z||_inf`
    pub r2: f64,
    /// `||C - J||_inf`
    pub r3: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight of the cluster-specific corruption term `||E_z||_{2,1}`.
    pub lambda1: f64,
    /// Weight of the nuclear norm on `C` (and on `Z` in the LRR baseline).
    pub lambda2: f64,
    /// Weight of the graph regulariser; ignored by plain FCMSC.
    pub lambda3: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// `Z` starts i.i.d. uniform on `[0, z_init_scale]`.
    pub z_init_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda1: 10.0,
            lambda2: 3.0,
            lambda3: 0.1,
            mu0: 1e-4,
            mu_max: 1e6,
            rho: 1.1,
            epsilon: 1e-6,
            max_iter: 500,
            seed: 0,
            z_init_scale: 0.01,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                fail(format!("{name} must be positive and finite, got {v}"))
            }
        };
        positive("lambda1", self.lambda1)?;
        positive("lambda2", self.lambda2)?;
        positive("mu0", self.mu0)?;
        positive("mu_max", self.mu_max)?;
        positive("epsilon", self.epsilon)?;
        if !(self.lambda3 >= 0.0) || !self.lambda3.is_finite() {
            return fail(format!("lambda3 must be >= 0, got {}", self.lambda3));
        }
        if self.mu0 > self.mu_max {
            return fail(format!(
                "mu0 ({}) exceeds mu_max ({})",
                self.mu0, self.mu_max
            ));
        }
        if !(self.rho > 1.0) || !self.rho.is_finite() {
            return fail(format!("rho must exceed 1, got {}", self.rho));
        }
        if self.max_iter == 0 {
            return fail("max_iter must be at least 1".into());
        }
        if !(self.z_init_scale >= 0.0) || !self.z_init_scale.is_finite() {
            return fail(format!(
                "z_init_scale must be >= 0, got {}",
                self.z_init_scale
            ));
        }
        Ok(())
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub residuals: Residuals,
    pub objective: f64,
    pub mu: f64,
}

/// All primal and dual variables of the FCMSC Lagrangian plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub z: DenseMatrix,
    pub c: DenseMatrix,
    pub e_x: DenseMatrix,
    pub e_z: DenseMatrix,
    pub j: DenseMatrix,
    pub y1: DenseMatrix,
    pub y2: DenseMatrix,
    pub y3: DenseMatrix,
    pub mu: f64,
    pub iter: usize,
    pub residuals: Residuals,
    pub objective: f64,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
}

impl SolverState {
    /// All-zero state with the given `Z` and penalty.
    pub fn zeros(d: usize, n: usize, z: DenseMatrix, mu: f64) -> Self {
        let sq = || DenseMatrix::zeros(n, n);
        Self {
            z,
            c: sq(),
            e_x: DenseMatrix::zeros(d, n),
            e_z: sq(),
            j: sq(),
            y1: DenseMatrix::zeros(d, n),
            y2: sq(),
            y3: sq(),
            mu,
            iter: 0,
            residuals: Residuals::default(),
            objective: 0.0,
            converged: false,
            history: Vec::new(),
        }
    }

    /// Cluster-specific corruption in feature space, `X E_z`.
    pub fn cluster_corruption(&self, x: &DenseMatrix) -> DenseMatrix {
        x * &self.e_z
    }

    /// Recomputes the three constraint residuals from the current variables.
    pub fn compute_residuals(&self, x: &DenseMatrix) -> Residuals {
        let r1 = x - x * &self.z - &self.e_x;
        let r2 = &self.z - &self.z * &self.c - &self.e_z;
        let r3 = &self.c - &self.j;
        Residuals {
            r1: crate::linalg::inf_norm(&r1),
            r2: crate::linalg::inf_norm(&r2),
            r3: crate::linalg::inf_norm(&r3),
        }
    }

    fn is_finite(&self) -> bool {
        [
            &self.z, &self.c, &self.e_x, &self.e_z, &self.j, &self.y1, &self.y2, &self.y3,
        ]
        .iter()
        .all(|m| m.iter().all(|v| v.is_finite()))
            && self.mu.is_finite()
    }
}
