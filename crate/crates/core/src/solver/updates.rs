//! Closed-form subproblem updates of the FCMSC augmented Lagrangian.

use nalgebra::Cholesky;

use super::{Residuals, SolverState};
use crate::error::{Error, Result};
use crate::linalg::{col_l21_prox, inf_norm, svt, symmetrize, DenseMatrix, SymmetricSylvester};

/// Cholesky pivots whose squared ratio exceeds this are treated as singular.
const MAX_CONDITION: f64 = 1e14;

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "penalty mu must be positive, got {mu}"
        )))
    }
}

/// `E_x = prox_{1/μ ||·||_{2,1}}(X - XZ + Y1/μ)`.
pub fn update_ex(x: &DenseMatrix, z: &DenseMatrix, y1: &DenseMatrix, mu: f64) -> Result<DenseMatrix> {
    check_mu(mu)?;
    let target = x - x * z + y1 / mu;
    col_l21_prox(&target, 1.0 / mu)
}

/// `E_z = prox_{λ1/μ ||·||_{2,1}}(Z - ZC + Y2/μ)`.
pub fn update_ez(
    z: &DenseMatrix,
    c: &DenseMatrix,
    y2: &DenseMatrix,
    mu: f64,
    lambda1: f64,
) -> Result<DenseMatrix> {
    check_mu(mu)?;
    let target = z - z * c + y2 / mu;
    col_l21_prox(&target, lambda1 / mu)
}

/// `J = SVT_{λ2/μ}(C + Y3/μ)`.
pub fn update_j(c: &DenseMatrix, y3: &DenseMatrix, mu: f64, lambda2: f64) -> Result<DenseMatrix> {
    check_mu(mu)?;
    let target = c + y3 / mu;
    svt(&target, lambda2 / mu)
}

/// Graph regulariser data for the `C` step: `λ3` and the summed Laplacian
/// `Σ_i L_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTerm {
    pub lambda3: f64,
    pub laplacian_sum: DenseMatrix,
}

impl GraphTerm {
    pub fn new(laplacians: &[&DenseMatrix], lambda3: f64) -> Result<Self> {
        let first = laplacians
            .first()
            .ok_or_else(|| Error::InvalidInput("graph term needs at least one Laplacian".into()))?;
        let n = first.nrows();
        let mut sum = DenseMatrix::zeros(n, n);
        for (i, l) in laplacians.iter().enumerate() {
            if l.shape() != (n, n) {
                return Err(Error::Shape(format!(
                    "Laplacian {i} is {}x{}, expected {n}x{n}",
                    l.nrows(),
                    l.ncols()
                )));
            }
            sum += *l;
        }
        Ok(Self {
            lambda3,
            laplacian_sum: sum,
        })
    }

    /// `Σ_i tr(Cᵀ L_i C)`, by linearity `tr(Cᵀ (Σ_i L_i) C)`.
    pub fn trace_penalty(&self, c: &DenseMatrix) -> f64 {
        c.dot(&(&self.laplacian_sum * c))
    }
}

/// Solves `T_CA C = T_CB` with `T_CA = μ(I + ZᵀZ) [+ λ3 Σ_i (L_iᵀ + L_i)]` and
/// `T_CB = μJ - Y3 + ZᵀY2 + μ(ZᵀZ - ZᵀE_z)` by Cholesky.
pub fn update_c(
    z: &DenseMatrix,
    e_z: &DenseMatrix,
    j: &DenseMatrix,
    y2: &DenseMatrix,
    y3: &DenseMatrix,
    mu: f64,
    graph: Option<&GraphTerm>,
) -> Result<DenseMatrix> {
    check_mu(mu)?;
    let n = z.ncols();
    let ztz = z.tr_mul(z);
    let mut t_ca = (DenseMatrix::identity(n, n) + &ztz) * mu;
    if let Some(g) = graph {
        if g.laplacian_sum.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "graph term is {}x{}, expected {n}x{n}",
                g.laplacian_sum.nrows(),
                g.laplacian_sum.ncols()
            )));
        }
        if g.lambda3 != 0.0 {
            t_ca += (&g.laplacian_sum + g.laplacian_sum.transpose()) * g.lambda3;
        }
    }
    let t_cb = j * mu - y3 + z.tr_mul(y2) + (ztz - z.tr_mul(e_z)) * mu;
    let chol = Cholesky::new(symmetrize(&t_ca)).ok_or_else(|| {
        Error::IllConditioned("C-step system is not positive definite".into())
    })?;
    let pivots = chol.l_dirty().diagonal();
    let (lo, hi) = pivots
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    if (hi / lo).powi(2) > MAX_CONDITION {
        return Err(Error::IllConditioned(format!(
            "C-step condition estimate {:.3e} exceeds {MAX_CONDITION:e}",
            (hi / lo).powi(2)
        )));
    }
    Ok(chol.solve(&t_cb))
}

/// The `Z` step with `XᵀX` and the decomposition of `XᵀX + I` cached.
#[derive(Debug, Clone)]
pub struct ZStep {
    xtx: DenseMatrix,
    left: SymmetricSylvester,
}

impl ZStep {
    pub fn new(x: &DenseMatrix) -> Result<Self> {
        let n = x.ncols();
        let xtx = symmetrize(&x.tr_mul(x));
        let left = SymmetricSylvester::new(&(&xtx + DenseMatrix::identity(n, n)))?;
        Ok(Self { xtx, left })
    }

    /// Solves `T_ZA Z + Z T_ZB = T_ZC` with `T_ZA = XᵀX + I`,
    /// `T_ZB = CCᵀ - C - Cᵀ` and
    /// `T_ZC = XᵀX - XᵀE_x + E_z - E_zCᵀ + XᵀY1/μ + (Y2Cᵀ - Y2)/μ`.
    #[allow(clippy::too_many_arguments)]
    pub fn solve(
        &self,
        x: &DenseMatrix,
        c: &DenseMatrix,
        e_x: &DenseMatrix,
        e_z: &DenseMatrix,
        y1: &DenseMatrix,
        y2: &DenseMatrix,
        mu: f64,
    ) -> Result<DenseMatrix> {
        check_mu(mu)?;
        let c_t = c.transpose();
        let t_zb = symmetrize(&(c * &c_t - c - &c_t));
        let t_zc = &self.xtx - x.tr_mul(e_x) + e_z - e_z * &c_t
            + x.tr_mul(y1) / mu
            + (y2 * &c_t - y2) / mu;
        self.left.solve_min_norm(&t_zb, &t_zc)
    }
}

pub fn update_z(
    x: &DenseMatrix,
    c: &DenseMatrix,
    e_x: &DenseMatrix,
    e_z: &DenseMatrix,
    y1: &DenseMatrix,
    y2: &DenseMatrix,
    mu: f64,
) -> Result<DenseMatrix> {
    ZStep::new(x)?.solve(x, c, e_x, e_z, y1, y2, mu)
}

/// Dual ascent on the three constraints followed by `μ ← min(ρμ, μ_max)`.
///
/// Returns the residual infinity norms at the pre-update variables.
pub fn update_multipliers(
    state: &mut SolverState,
    x: &DenseMatrix,
    rho: f64,
    mu_max: f64,
) -> Residuals {
    let r1 = x - x * &state.z - &state.e_x;
    let r2 = &state.z - &state.z * &state.c - &state.e_z;
    let r3 = &state.c - &state.j;
    let mu = state.mu;
    state.y1 += &r1 * mu;
    state.y2 += &r2 * mu;
    state.y3 += &r3 * mu;
    state.mu = (rho * mu).min(mu_max);
    Residuals {
        r1: inf_norm(&r1),
        r2: inf_norm(&r2),
        r3: inf_norm(&r3),
    }
}
