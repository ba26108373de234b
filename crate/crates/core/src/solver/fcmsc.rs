use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::updates::{update_c, update_ex, update_ez, update_j, update_multipliers, GraphTerm, ZStep};
use super::{IterationRecord, SolverConfig, SolverState};
use crate::dataset::JointRepresentation;
use crate::error::{Error, Result};
use crate::graph::ViewGraph;
use crate::linalg::{ensure_finite, l21_norm, nuclear_norm, DenseMatrix};

/// Which objective is being tracked.
#[derive(Debug, Clone, Copy)]
pub enum Mode<'a> {
    Fcmsc,
    GrFcmsc(&'a GraphTerm),
}

/// `||E_x||_{2,1} + λ1 ||E_z||_{2,1} + λ2 ||J||_*`, plus
/// `λ3 Σ_i tr(Cᵀ L_i C)` in graph mode. Diagnostic only: the ALM iterates
/// are not guaranteed to decrease it.
pub fn objective_value(state: &SolverState, config: &SolverConfig, mode: Mode<'_>) -> Result<f64> {
    let base = l21_norm(&state.e_x)?
        + config.lambda1 * l21_norm(&state.e_z)?
        + config.lambda2 * nuclear_norm(&state.j)?;
    Ok(match mode {
        Mode::Fcmsc => base,
        Mode::GrFcmsc(g) => base + g.lambda3 * g.trace_penalty(&state.c),
    })
}

fn initial_z(n: usize, config: &SolverConfig) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = config.z_init_scale;
    DenseMatrix::from_fn(n, n, |_, _| {
        if scale > 0.0 {
            rng.random_range(0.0..=scale)
        } else {
            0.0
        }
    })
}

/// Runs FCMSC on a (normalised) joint representation. `lambda3` is ignored.
///
/// Hitting `max_iter` is not an error: the state comes back with
/// `converged == false`.
pub fn fcmsc_solve(joint: &JointRepresentation, config: &SolverConfig) -> Result<SolverState> {
    run(&joint.x, config, None)
}

/// Runs gr-FCMSC with one Laplacian per view.
pub fn grfcmsc_solve(
    joint: &JointRepresentation,
    graphs: &[ViewGraph],
    config: &SolverConfig,
) -> Result<SolverState> {
    if graphs.len() != joint.n_views() {
        return Err(Error::InvalidInput(format!(
            "{} Laplacians for {} views",
            graphs.len(),
            joint.n_views()
        )));
    }
    let laplacians: Vec<&DenseMatrix> = graphs.iter().map(|g| &g.l).collect();
    let term = GraphTerm::new(&laplacians, config.lambda3)?;
    run(&joint.x, config, Some(&term))
}

pub(crate) fn run(x: &DenseMatrix, config: &SolverConfig, graph: Option<&GraphTerm>) -> Result<SolverState> {
    config.validate()?;
    ensure_finite(x, "data matrix")?;
    let (d, n) = x.shape();
    if let Some(g) = graph {
        if g.laplacian_sum.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "Laplacians are {}x{}, data has {n} samples",
                g.laplacian_sum.nrows(),
                g.laplacian_sum.ncols()
            )));
        }
    }
    let mode = graph.map_or(Mode::Fcmsc, Mode::GrFcmsc);
    let z_step = ZStep::new(x)?;

    let mut state = SolverState::zeros(d, n, initial_z(n, config), config.mu0);
    for iter in 1..=config.max_iter {
        let mu = state.mu;
        state.e_x = update_ex(x, &state.z, &state.y1, mu)?;
        state.z = z_step.solve(x, &state.c, &state.e_x, &state.e_z, &state.y1, &state.y2, mu)?;
        state.e_z = update_ez(&state.z, &state.c, &state.y2, mu, config.lambda1)?;
        state.c = update_c(&state.z, &state.e_z, &state.j, &state.y2, &state.y3, mu, graph)?;
        state.j = update_j(&state.c, &state.y3, mu, config.lambda2)?;
        let residuals = update_multipliers(&mut state, x, config.rho, config.mu_max);

        if !state.is_finite() {
            return Err(Error::Divergence {
                iteration: iter,
                last_good: iter - 1,
            });
        }
        state.iter = iter;
        state.residuals = residuals;
        state.objective = objective_value(&state, config, mode)?;
        state.history.push(IterationRecord {
            iter,
            residuals,
            objective: state.objective,
            mu,
        });
        if residuals.max() < config.epsilon {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}
