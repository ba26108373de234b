//! Dense matrix primitives used by the solvers.
//!
//! All matrices are [`DenseMatrix`] (`nalgebra::DMatrix<f64>`, column-major).
//! Every function here is a pure function of its arguments.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;

const SVD_MAX_ITER: usize = 10_000;
const EIGEN_MAX_ITER: usize = 10_000;

/// Relative guard on `alpha_i + beta_j` in [`solve_sylvester`].
pub const SYLVESTER_PAIR_TOL: f64 = 1e-10;

pub fn ensure_nonempty(m: &DenseMatrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::InvalidInput(format!("{what} is empty")));
    }
    Ok(())
}

pub fn ensure_finite(m: &DenseMatrix, what: &str) -> Result<()> {
    if let Some(pos) = m.iter().position(|x| !x.is_finite()) {
        let (r, c) = (pos % m.nrows(), pos / m.nrows());
        return Err(Error::InvalidInput(format!(
            "{what} has a non-finite entry at ({r}, {c})"
        )));
    }
    Ok(())
}

/// Largest absolute entry (0 for an empty matrix).
pub fn inf_norm(m: &DenseMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Sum of the Euclidean norms of the columns.
pub fn l21_norm(m: &DenseMatrix) -> Result<f64> {
    ensure_nonempty(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    Ok(m.column_iter().map(|c| c.norm()).sum())
}

/// Thin-SVD singular values, unsorted as returned by the decomposition.
pub fn singular_values(m: &DenseMatrix) -> Result<DVector<f64>> {
    ensure_nonempty(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    m.clone()
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITER)
        .map(|svd| svd.singular_values)
        .ok_or(Error::Numerical {
            what: "SVD",
            iterations: SVD_MAX_ITER,
        })
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.sum())
}

/// Column-wise shrinkage, the minimiser of `tau * ||E||_{2,1} + 1/2 ||E - T||_F^2`.
///
/// Column `j` becomes `(||t_j|| - tau) / ||t_j|| * t_j` when `||t_j|| > tau`
/// and zero otherwise.
pub fn col_l21_prox(t: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "prox threshold must be positive and finite, got {tau}"
        )));
    }
    ensure_finite(t, "prox target")?;
    let mut out = DenseMatrix::zeros(t.nrows(), t.ncols());
    for (j, col) in t.column_iter().enumerate() {
        let norm = col.norm();
        if norm > tau {
            let scale = (norm - tau) / norm;
            out.column_mut(j).copy_from(&(col * scale));
        }
    }
    Ok(out)
}

/// Singular value thresholding, the minimiser of
/// `tau * ||J||_* + 1/2 ||J - T||_F^2`.
pub fn svt(t: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "SVT threshold must be positive and finite, got {tau}"
        )));
    }
    ensure_nonempty(t, "SVT target")?;
    ensure_finite(t, "SVT target")?;
    let svd = t
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::Numerical {
            what: "SVD",
            iterations: SVD_MAX_ITER,
        })?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => unreachable!("SVD was requested with both factors"),
    };
    let mut out = DenseMatrix::zeros(t.nrows(), t.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = s - tau;
        if shrunk > 0.0 {
            out.ger(shrunk, &u.column(k), &v_t.row(k).transpose(), 1.0);
        }
    }
    Ok(out)
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending and the
/// eigenvector columns permuted to match.
pub fn sym_eigen(m: &DenseMatrix) -> Result<(DVector<f64>, DenseMatrix)> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    ensure_nonempty(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or(
        Error::Numerical {
            what: "symmetric eigendecomposition",
            iterations: EIGEN_MAX_ITER,
        },
    )?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).copy_from(&eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Solves `A Z + Z B = RHS` for symmetric `A` (p×p) and `B` (q×q) through
/// their eigendecompositions.
///
/// With `A = Qa diag(alpha) Qaᵀ` and `B = Qb diag(beta) Qbᵀ`, the solution is
/// `Qa (M ⊘ (alpha_i + beta_j)) Qbᵀ` where `M = Qaᵀ RHS Qb`. A pair whose sum
/// is below `1e-10 * max(|alpha|, |beta|, 1)` is reported as
/// [`Error::IllConditionedSylvester`] instead of being regularised.
///
/// For well-separated spectra the residual `||A Z + Z B - RHS||_inf` is at the
/// level of `1e-12 * ||RHS||_inf * cond`, far below `1e-8` in the solver's use.
pub fn solve_sylvester(a: &DenseMatrix, b: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    SymmetricSylvester::new(a)?.solve(b, rhs)
}

/// A Sylvester solver with the left operator's eigendecomposition cached.
///
/// In the FCMSC `Z` step the left operator `XᵀX + I` is fixed for a whole
/// run, so only the right operator needs decomposing per iteration.
#[derive(Debug, Clone)]
pub struct SymmetricSylvester {
    alpha: DVector<f64>,
    q_a: DenseMatrix,
}

impl SymmetricSylvester {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        ensure_symmetric(a, "Sylvester left operator")?;
        let (alpha, q_a) = sym_eigen(a)?;
        Ok(Self { alpha, q_a })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn solve(&self, b: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.solve_inner(b, rhs, false)
    }

    /// Like [`solve`](Self::solve), but eigenvalue pairs below the guard are
    /// dropped instead of rejected, giving the minimum-Frobenius-norm
    /// least-squares solution.
    ///
    /// Meant for normal equations of a convex quadratic, which are always
    /// consistent: there a vanishing `alpha_i + beta_j` marks a flat
    /// direction of the objective, not an inconsistent system.
    pub fn solve_min_norm(&self, b: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.solve_inner(b, rhs, true)
    }

    fn solve_inner(&self, b: &DenseMatrix, rhs: &DenseMatrix, drop_singular: bool) -> Result<DenseMatrix> {
        let p = self.dim();
        ensure_symmetric(b, "Sylvester right operator")?;
        let q = b.nrows();
        if rhs.shape() != (p, q) {
            return Err(Error::Shape(format!(
                "Sylvester right-hand side is {}x{}, expected {p}x{q}",
                rhs.nrows(),
                rhs.ncols()
            )));
        }
        ensure_finite(rhs, "Sylvester right-hand side")?;
        let (beta, q_b) = sym_eigen(b)?;

        let scale = self
            .alpha
            .iter()
            .chain(beta.iter())
            .fold(1.0_f64, |acc, x| acc.max(x.abs()));
        let tol = SYLVESTER_PAIR_TOL * scale;

        let mut m = self.q_a.tr_mul(rhs) * &q_b;
        for j in 0..q {
            for i in 0..p {
                let denom = self.alpha[i] + beta[j];
                if denom.abs() < tol {
                    if drop_singular {
                        m[(i, j)] = 0.0;
                        continue;
                    }
                    return Err(Error::IllConditionedSylvester {
                        i,
                        j,
                        alpha: self.alpha[i],
                        beta: beta[j],
                        tol,
                    });
                }
                m[(i, j)] /= denom;
            }
        }
        Ok(&self.q_a * m * q_b.transpose())
    }
}

fn ensure_symmetric(m: &DenseMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    ensure_nonempty(m, what)?;
    ensure_finite(m, what)?;
    let scale = inf_norm(m).max(1.0);
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::InvalidInput(format!(
                    "{what} is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Symmetric part `(M + Mᵀ) / 2`, used to scrub round-off asymmetry from
/// products that are symmetric in exact arithmetic.
pub fn symmetrize(m: &DenseMatrix) -> DenseMatrix {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn l21_norm_basics() {
        assert_eq!(l21_norm(&DenseMatrix::zeros(3, 4)).unwrap(), 0.0);
        assert_eq!(l21_norm(&dmatrix![3.0; 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn l21_norm_matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random(4, 6, &mut rng);
        let mut oracle = 0.0;
        for j in 0..6 {
            let mut s = 0.0;
            for i in 0..4 {
                s += m[(i, j)] * m[(i, j)];
            }
            oracle += f64::sqrt(s);
        }
        assert!((l21_norm(&m).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn l21_norm_rejects_nan() {
        let m = dmatrix![1.0, f64::NAN];
        assert!(matches!(l21_norm(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn nuclear_norm_basics() {
        assert!((nuclear_norm(&DenseMatrix::identity(3, 3)).unwrap() - 3.0).abs() < 1e-12);
        assert!((nuclear_norm(&dmatrix![2.0, 0.0; 0.0, 0.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nuclear_norm_matches_eigen_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random(5, 5, &mut rng);
        // trace(sqrt(MᵀM)) = sum of square roots of the Gram eigenvalues
        let gram = m.transpose() * &m;
        let eig = SymmetricEigen::new(gram);
        let oracle: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
        assert!((nuclear_norm(&m).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn prox_known_column() {
        let e = col_l21_prox(&dmatrix![3.0; 4.0], 1.0).unwrap();
        assert!((e[(0, 0)] - 2.4).abs() < 1e-15);
        assert!((e[(1, 0)] - 3.2).abs() < 1e-15);
    }

    #[test]
    fn prox_known_column_against_line_search() {
        // Along direction t the minimiser is s*t/|t|; scan s on a fine grid.
        let (t0, t1, tau) = (3.0_f64, 4.0_f64, 1.0);
        let norm = (t0 * t0 + t1 * t1).sqrt();
        let f = |s: f64| tau * s.abs() + 0.5 * (s - norm).powi(2);
        let best = (0..=500_000)
            .map(|k| k as f64 * 1e-5)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        let e = col_l21_prox(&dmatrix![t0; t1], tau).unwrap();
        assert!((e[(0, 0)] - best * t0 / norm).abs() < 1e-5);
        assert!((e[(1, 0)] - best * t1 / norm).abs() < 1e-5);
    }

    #[test]
    fn prox_small_column_vanishes() {
        let e = col_l21_prox(&dmatrix![0.3; 0.4], 1.0).unwrap();
        assert_eq!(e, DenseMatrix::zeros(2, 1));
        let z = col_l21_prox(&DenseMatrix::zeros(3, 5), 0.7).unwrap();
        assert_eq!(z, DenseMatrix::zeros(3, 5));
    }

    #[test]
    fn prox_rejects_nonpositive_tau() {
        let t = DenseMatrix::zeros(2, 2);
        assert!(matches!(col_l21_prox(&t, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(col_l21_prox(&t, -1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(svt(&t, 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn svt_diagonal() {
        let j = svt(&dmatrix![3.0, 0.0; 0.0, 1.0], 2.0).unwrap();
        let expected = dmatrix![1.0, 0.0; 0.0, 0.0];
        assert!((j - &expected).amax() < 1e-12);

        // scan diagonal candidates diag(a, b) for the prox objective
        let f = |a: f64, b: f64| 2.0 * (a.abs() + b.abs()) + 0.5 * ((a - 3.0).powi(2) + (b - 1.0).powi(2));
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for ia in 0..=400 {
            for ib in 0..=400 {
                let (a, b) = (ia as f64 * 0.01, ib as f64 * 0.01);
                let v = f(a, b);
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        assert!((best.1 - 1.0).abs() < 1e-9 && best.2.abs() < 1e-9);
    }

    #[test]
    fn svt_large_tau_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random(4, 6, &mut rng);
        let top = singular_values(&t).unwrap().max();
        assert_eq!(svt(&t, top * 1.01).unwrap(), DenseMatrix::zeros(4, 6));
    }

    #[test]
    fn svt_tiny_tau_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random(5, 3, &mut rng);
        assert!((svt(&t, 1e-12).unwrap() - &t).norm() < 1e-9);
    }

    #[test]
    fn sylvester_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = random(3, 4, &mut rng);
        let z = solve_sylvester(&DenseMatrix::identity(3, 3), &DenseMatrix::zeros(4, 4), &r).unwrap();
        assert!((z - &r).amax() < 1e-12);
        let z = solve_sylvester(
            &(DenseMatrix::identity(3, 3) * 2.0),
            &DenseMatrix::identity(4, 4),
            &r,
        )
        .unwrap();
        assert!((z - &r / 3.0).amax() < 1e-12);
    }

    #[test]
    fn sylvester_matches_kronecker_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = random(5, 5, &mut rng);
        let a = g.transpose() * &g + DenseMatrix::identity(5, 5);
        let h = random(5, 5, &mut rng);
        let b = symmetrize(&h);
        let rhs = random(5, 5, &mut rng);
        let z = solve_sylvester(&a, &b, &rhs).unwrap();
        assert!((&a * &z + &z * &b - &rhs).amax() < 1e-8);

        // vec(AZ + ZB) = (I ⊗ A + Bᵀ ⊗ I) vec(Z) for column-major vec
        let id = DenseMatrix::identity(5, 5);
        let k = id.kronecker(&a) + b.transpose().kronecker(&id);
        let vec_rhs = DVector::from_column_slice(rhs.as_slice());
        let vec_z = k.lu().solve(&vec_rhs).unwrap();
        let direct = DenseMatrix::from_column_slice(5, 5, vec_z.as_slice());
        assert!((z - direct).amax() < 1e-8);
    }

    #[test]
    fn sylvester_singular_pair_is_reported() {
        let a = DenseMatrix::identity(2, 2);
        let b = -DenseMatrix::identity(2, 2);
        let rhs = DenseMatrix::from_element(2, 2, 1.0);
        match solve_sylvester(&a, &b, &rhs) {
            Err(Error::IllConditionedSylvester { alpha, beta, .. }) => {
                assert_eq!(alpha, 1.0);
                assert_eq!(beta, -1.0);
            }
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn sylvester_rejects_asymmetric() {
        let a = dmatrix![1.0, 2.0; 0.0, 1.0];
        let b = DenseMatrix::identity(2, 2);
        assert!(matches!(
            solve_sylvester(&a, &b, &DenseMatrix::zeros(2, 2)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn primitives_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = random(6, 6, &mut rng);
        assert_eq!(svt(&t, 0.3).unwrap(), svt(&t, 0.3).unwrap());
        assert_eq!(col_l21_prox(&t, 0.3).unwrap(), col_l21_prox(&t, 0.3).unwrap());
        let a = t.transpose() * &t + DenseMatrix::identity(6, 6);
        let b = symmetrize(&t);
        assert_eq!(
            solve_sylvester(&a, &b, &t).unwrap(),
            solve_sylvester(&a, &b, &t).unwrap()
        );
    }
}
