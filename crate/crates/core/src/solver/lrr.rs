use nalgebra::Cholesky;

use super::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::{col_l21_prox, ensure_finite, inf_norm, svt, symmetrize, DenseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LrrResult {
    pub z: DenseMatrix,
    pub e_x: DenseMatrix,
    pub iters: usize,
    pub converged: bool,
}

/// Low-rank representation `min ||E||_{2,1} + λ ||Z||_* s.t. X = XZ + E`.
///
/// Inexact ALM with the splitting `Z = J`: `J` by SVT, `Z` from the
/// normal equations `(I + XᵀX) Z = XᵀX - XᵀE + J + (XᵀY1 - Y2)/μ`, `E` by
/// column shrinkage. Uses `mu0`, `mu_max`, `rho`, `epsilon` and `max_iter`
/// from `config`; the λ values there are ignored.
pub fn lrr_solve(x: &DenseMatrix, lambda: f64, config: &SolverConfig) -> Result<LrrResult> {
    config.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "LRR lambda must be positive, got {lambda}"
        )));
    }
    ensure_finite(x, "data matrix")?;
    let (d, n) = x.shape();
    let xtx = symmetrize(&x.tr_mul(x));
    let chol = Cholesky::new(&xtx + DenseMatrix::identity(n, n))
        .ok_or_else(|| Error::IllConditioned("I + XᵀX is not positive definite".into()))?;

    let mut z = DenseMatrix::zeros(n, n);
    let mut j;
    let mut e = DenseMatrix::zeros(d, n);
    let mut y1 = DenseMatrix::zeros(d, n);
    let mut y2 = DenseMatrix::zeros(n, n);
    let mut mu = config.mu0;

    for iter in 1..=config.max_iter {
        j = svt(&(&z + &y2 / mu), lambda / mu)?;
        let rhs = &xtx - x.tr_mul(&e) + &j + (x.tr_mul(&y1) - &y2) / mu;
        z = chol.solve(&rhs);
        e = col_l21_prox(&(x - x * &z + &y1 / mu), 1.0 / mu)?;

        let r1 = x - x * &z - &e;
        let r2 = &z - &j;
        y1 += &r1 * mu;
        y2 += &r2 * mu;
        mu = (config.rho * mu).min(config.mu_max);

        if !(z.iter().chain(e.iter()).chain(y1.iter()).chain(y2.iter()).all(|v| v.is_finite())) {
            return Err(Error::Divergence {
                iteration: iter,
                last_good: iter - 1,
            });
        }
        if inf_norm(&r1).max(inf_norm(&r2)) < config.epsilon {
            return Ok(LrrResult {
                z,
                e_x: e,
                iters: iter,
                converged: true,
            });
        }
    }
    Ok(LrrResult {
        z,
        e_x: e,
        iters: config.max_iter,
        converged: false,
    })
}
