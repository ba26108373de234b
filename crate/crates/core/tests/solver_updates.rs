use fcmsc_core::graph::{knn_adjacency, laplacian, Bandwidth};
use fcmsc_core::linalg::{col_l21_prox, l21_norm, nuclear_norm, DenseMatrix};
use fcmsc_core::solver::{
    objective_value, update_c, update_ex, update_ez, update_j, update_multipliers, update_z,
    GraphTerm, Mode, SolverConfig, SolverState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    x: DenseMatrix,
    state: SolverState,
}

fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn instance(d: usize, n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random(d, n, &mut rng);
    let mu = rng.random_range(0.5..5.0);
    let mut state = SolverState::zeros(d, n, random(n, n, &mut rng), mu);
    state.c = random(n, n, &mut rng) * 0.5;
    state.e_x = random(d, n, &mut rng) * 0.1;
    state.e_z = random(n, n, &mut rng) * 0.1;
    state.j = random(n, n, &mut rng);
    state.y1 = random(d, n, &mut rng);
    state.y2 = random(n, n, &mut rng);
    state.y3 = random(n, n, &mut rng);
    Instance { x, state }
}

fn c_objective(s: &SolverState, c: &DenseMatrix, graph: Option<&GraphTerm>) -> f64 {
    let mu = s.mu;
    let a = &s.z - &s.z * c - &s.e_z + &s.y2 / mu;
    let b = c - &s.j + &s.y3 / mu;
    let g = graph.map_or(0.0, |g| g.lambda3 * g.trace_penalty(c));
    0.5 * mu * (a.norm_squared() + b.norm_squared()) + g
}

fn z_objective(x: &DenseMatrix, s: &SolverState, z: &DenseMatrix) -> f64 {
    let mu = s.mu;
    let a = x - x * z - &s.e_x + &s.y1 / mu;
    let b = z - z * &s.c - &s.e_z + &s.y2 / mu;
    0.5 * mu * (a.norm_squared() + b.norm_squared())
}

/// Central-difference gradient of `f` at `at`.
fn fd_gradient(at: &DenseMatrix, f: impl Fn(&DenseMatrix) -> f64) -> DenseMatrix {
    let h = 1e-5;
    DenseMatrix::from_fn(at.nrows(), at.ncols(), |i, j| {
        let mut p = at.clone();
        p[(i, j)] += h;
        let mut m = at.clone();
        m[(i, j)] -= h;
        (f(&p) - f(&m)) / (2.0 * h)
    })
}

fn graph_for(n: usize, seed: u64, lambda3: f64) -> GraphTerm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let laps: Vec<DenseMatrix> = (0..2)
        .map(|_| {
            let pts = random(3, n, &mut rng);
            laplacian(&knn_adjacency(&pts, 2, Bandwidth::Auto).unwrap()).unwrap().l
        })
        .collect();
    let refs: Vec<&DenseMatrix> = laps.iter().collect();
    GraphTerm::new(&refs, lambda3).unwrap()
}

#[test]
fn ex_is_zero_at_exact_representation() {
    let x = DenseMatrix::from_fn(4, 5, |i, j| (i + 2 * j) as f64);
    let z = DenseMatrix::identity(5, 5);
    let e = update_ex(&x, &z, &DenseMatrix::zeros(4, 5), 2.0).unwrap();
    assert_eq!(e, DenseMatrix::zeros(4, 5));
}

#[test]
fn ex_vanishes_for_tiny_mu() {
    let inst = instance(6, 5, 1);
    let s = &inst.state;
    let e = update_ex(&inst.x, &s.z, &DenseMatrix::zeros(6, 5), 1e-8).unwrap();
    assert_eq!(e, DenseMatrix::zeros(6, 5));
}

#[test]
fn ex_and_ez_match_columnwise_line_search() {
    for seed in 0..5 {
        let inst = instance(7, 6, seed);
        let s = &inst.state;
        let checks = [
            (
                update_ex(&inst.x, &s.z, &s.y1, s.mu).unwrap(),
                &inst.x - &inst.x * &s.z + &s.y1 / s.mu,
                1.0 / s.mu,
            ),
            (
                update_ez(&s.z, &s.c, &s.y2, s.mu, 0.7).unwrap(),
                &s.z - &s.z * &s.c + &s.y2 / s.mu,
                0.7 / s.mu,
            ),
        ];
        for (got, target, tau) in checks {
            for (g, t) in got.column_iter().zip(target.column_iter()) {
                // The minimiser is a non-negative multiple of the target column;
                // search that ray by golden section.
                let f = |a: f64| tau * (a * t.norm()) + 0.5 * (1.0 - a).powi(2) * t.norm_squared();
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) * 0.382;
                    let m2 = lo + (hi - lo) * 0.618;
                    if f(m1) <= f(m2) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let a = if f(0.0) <= f(0.5 * (lo + hi)) { 0.0 } else { 0.5 * (lo + hi) };
                assert!((g - t * a).amax() < 1e-6, "seed {seed}");
            }
        }
    }
}

#[test]
fn ez_vanishes_for_large_lambda1() {
    let inst = instance(5, 4, 3);
    let s = &inst.state;
    let e = update_ez(&s.z, &s.c, &s.y2, s.mu, 1e9).unwrap();
    assert_eq!(e, DenseMatrix::zeros(4, 4));
}

#[test]
fn j_trivial_cases() {
    let z = DenseMatrix::zeros(4, 4);
    assert_eq!(update_j(&z, &z, 1.0, 1.0).unwrap(), z);
    let inst = instance(4, 4, 9);
    let s = &inst.state;
    let big = update_j(&s.c, &z, 1e-6, 1.0).unwrap();
    assert_eq!(big, z);
}

#[test]
fn j_minimises_its_prox_objective() {
    let inst = instance(4, 5, 4);
    let s = &inst.state;
    let lambda2 = 0.8;
    let j = update_j(&s.c, &s.y3, s.mu, lambda2).unwrap();
    let target = &s.c + &s.y3 / s.mu;
    let tau = lambda2 / s.mu;
    let f = |m: &DenseMatrix| tau * nuclear_norm(m).unwrap() + 0.5 * (m - &target).norm_squared();
    let best = f(&j);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..300 {
        let p = &j + random(5, 5, &mut rng) * 1e-3;
        assert!(best <= f(&p) + 1e-12);
    }
}

#[test]
fn c_solves_its_normal_equations() {
    for seed in 0..10 {
        let inst = instance(8, 6, seed);
        let s = &inst.state;
        let graph = graph_for(6, seed, 0.3);
        for g in [None, Some(&graph)] {
            let c = update_c(&s.z, &s.e_z, &s.j, &s.y2, &s.y3, s.mu, g).unwrap();
            let n = 6;
            let ztz = s.z.transpose() * &s.z;
            let mut t_ca = (DenseMatrix::identity(n, n) + &ztz) * s.mu;
            if let Some(g) = g {
                t_ca += (&g.laplacian_sum + g.laplacian_sum.transpose()) * g.lambda3;
            }
            let t_cb = &s.j * s.mu - &s.y3 + s.z.transpose() * &s.y2
                + (&ztz - s.z.transpose() * &s.e_z) * s.mu;
            assert!((t_ca * &c - t_cb).amax() < 1e-8);
        }
    }
}

#[test]
fn c_is_stationary() {
    for seed in 0..10 {
        let inst = instance(8, 6, seed);
        let s = &inst.state;
        let graph = graph_for(6, seed, 0.5);
        for g in [None, Some(&graph)] {
            let c = update_c(&s.z, &s.e_z, &s.j, &s.y2, &s.y3, s.mu, g).unwrap();
            let grad = fd_gradient(&c, |m| c_objective(s, m, g));
            assert!(grad.amax() < 1e-6, "seed {seed}: {}", grad.amax());
        }
    }
}

#[test]
fn c_with_zero_lambda3_is_bitwise_plain() {
    let inst = instance(7, 5, 2);
    let s = &inst.state;
    let graph = graph_for(5, 2, 0.0);
    let plain = update_c(&s.z, &s.e_z, &s.j, &s.y2, &s.y3, s.mu, None).unwrap();
    let with = update_c(&s.z, &s.e_z, &s.j, &s.y2, &s.y3, s.mu, Some(&graph)).unwrap();
    assert_eq!(plain, with);
}

#[test]
fn z_solves_its_sylvester_equation() {
    for seed in 0..10 {
        let inst = instance(9, 6, seed);
        let (x, s) = (&inst.x, &inst.state);
        let z = update_z(x, &s.c, &s.e_x, &s.e_z, &s.y1, &s.y2, s.mu).unwrap();
        let n = 6;
        let ct = s.c.transpose();
        let t_za = x.transpose() * x + DenseMatrix::identity(n, n);
        let t_zb = &s.c * &ct - &s.c - &ct;
        let t_zc = x.transpose() * x - x.transpose() * &s.e_x + &s.e_z - &s.e_z * &ct
            + x.transpose() * &s.y1 / s.mu
            + (&s.y2 * &ct - &s.y2) / s.mu;
        assert!((t_za * &z + &z * t_zb - t_zc).amax() < 1e-8, "seed {seed}");
    }
}

#[test]
fn z_is_stationary() {
    for seed in 0..10 {
        let inst = instance(9, 6, seed);
        let (x, s) = (&inst.x, &inst.state);
        let z = update_z(x, &s.c, &s.e_x, &s.e_z, &s.y1, &s.y2, s.mu).unwrap();
        let grad = fd_gradient(&z, |m| z_objective(x, s, m));
        assert!(grad.amax() < 1e-6, "seed {seed}: {}", grad.amax());
    }
}

#[test]
fn z_reduces_to_a_linear_solve_without_c() {
    let inst = instance(7, 5, 5);
    let (x, s) = (&inst.x, &inst.state);
    let zero = DenseMatrix::zeros(5, 5);
    let z = update_z(x, &zero, &s.e_x, &zero, &s.y1, &zero, s.mu).unwrap();
    let a = x.transpose() * x + DenseMatrix::identity(5, 5);
    let b = x.transpose() * x - x.transpose() * &s.e_x + x.transpose() * &s.y1 / s.mu;
    let direct = a.lu().solve(&b).unwrap();
    assert!((z - direct).amax() < 1e-10);
}

#[test]
fn multipliers_follow_the_hand_expansion() {
    let x = DenseMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, -1.0, 3.0, 0.0, 1.0]);
    let z = DenseMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5]);
    let mut s = SolverState::zeros(3, 3, z, 2.0);
    s.c = DenseMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
    s.j = DenseMatrix::identity(3, 3);
    let res = update_multipliers(&mut s, &x, 1.5, 100.0);

    // Y1 = 2 (X - 0.5 X) = X.
    assert_eq!(s.y1, x);
    // Y2 = 2 (Z - ZC) = 2 * diag(0, 0.5, -0.5) = diag(0, 1, -1).
    let y2 = DenseMatrix::from_diagonal(&nalgebra::dvector![0.0, 1.0, -1.0]);
    assert_eq!(s.y2, y2);
    // Y3 = 2 (C - I) = diag(0, -2, 2).
    let y3 = DenseMatrix::from_diagonal(&nalgebra::dvector![0.0, -2.0, 2.0]);
    assert_eq!(s.y3, y3);
    assert_eq!(s.mu, 3.0);
    assert_eq!((res.r1, res.r2, res.r3), (1.5, 0.5, 1.0));
}

#[test]
fn multipliers_hold_still_at_feasibility_and_mu_clamps() {
    let x = DenseMatrix::from_fn(3, 4, |i, j| (i * 4 + j) as f64);
    let mut s = SolverState::zeros(3, 4, DenseMatrix::identity(4, 4), 5.0);
    s.c = DenseMatrix::identity(4, 4);
    s.j = DenseMatrix::identity(4, 4);
    s.y1 = DenseMatrix::from_element(3, 4, 0.3);
    let before = s.clone();
    let res = update_multipliers(&mut s, &x, 1.1, 1e6);
    assert_eq!(res.max(), 0.0);
    assert_eq!((&s.y1, &s.y2, &s.y3), (&before.y1, &before.y2, &before.y3));
    assert!((s.mu - 5.5).abs() < 1e-15);

    s.mu = 1e6;
    update_multipliers(&mut s, &x, 1.1, 1e6);
    assert_eq!(s.mu, 1e6);
}

#[test]
fn objective_matches_a_hand_computation() {
    let mut s = SolverState::zeros(2, 2, DenseMatrix::zeros(2, 2), 1.0);
    let cfg = SolverConfig { lambda1: 2.0, lambda2: 0.5, ..Default::default() };
    assert_eq!(objective_value(&s, &cfg, Mode::Fcmsc).unwrap(), 0.0);

    s.e_x = DenseMatrix::from_row_slice(2, 2, &[3.0, 0.0, 4.0, 1.0]);
    s.e_z = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
    s.j = DenseMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]);
    s.c = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    // ||E_x||_{2,1} = 5 + 1, ||E_z||_{2,1} = sqrt(2), ||J||_* = 5.
    let expected = 6.0 + 2.0 * 2f64.sqrt() + 0.5 * 5.0;
    let got = objective_value(&s, &cfg, Mode::Fcmsc).unwrap();
    assert!((got - expected).abs() < 1e-10);

    // L = [[1, -1], [-1, 1]]: tr(Cᵀ L C) = 1 for C = e1 e1ᵀ.
    let l = DenseMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
    let g = GraphTerm::new(&[&l], 0.25).unwrap();
    let gr = objective_value(&s, &cfg, Mode::GrFcmsc(&g)).unwrap();
    assert!((gr - expected - 0.25).abs() < 1e-10);

    let g0 = GraphTerm::new(&[&l], 0.0).unwrap();
    assert_eq!(objective_value(&s, &cfg, Mode::GrFcmsc(&g0)).unwrap(), got);
}

#[test]
fn updates_reject_non_positive_mu() {
    let inst = instance(3, 3, 0);
    let s = &inst.state;
    assert!(update_ex(&inst.x, &s.z, &s.y1, 0.0).is_err());
    assert!(update_ez(&s.z, &s.c, &s.y2, -1.0, 1.0).is_err());
    assert!(update_j(&s.c, &s.y3, f64::NAN, 1.0).is_err());
    assert!(update_c(&s.z, &s.e_z, &s.j, &s.y2, &s.y3, 0.0, None).is_err());
}

#[test]
fn prox_based_updates_agree_with_linalg() {
    let inst = instance(5, 5, 8);
    let s = &inst.state;
    let direct = col_l21_prox(&(&inst.x - &inst.x * &s.z + &s.y1 / s.mu), 1.0 / s.mu).unwrap();
    assert_eq!(update_ex(&inst.x, &s.z, &s.y1, s.mu).unwrap(), direct);
    assert!(l21_norm(&direct).unwrap().is_finite());
}
