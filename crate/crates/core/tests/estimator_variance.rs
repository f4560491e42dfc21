//! Statistical behavior of the recursive-momentum estimator on a frozen
//! iterate path: squared estimation error must shrink roughly like `1/t`.

use ircg::estimators::{estimate_error, EstimatorState, LevelRngs, StormState};
use ircg::lmo::{lmo, random_point};
use ircg::problem::ProblemInstance;
use ircg::problems::RegressionData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A deterministic feasible path with conditional-gradient-like step decay:
/// moves toward a randomly chosen vertex with stepsize `2/(t+2)`. The path
/// generator is seeded independently of the estimator noise and shared
/// across replications.
pub fn frozen_path(problem: &ProblemInstance, steps: usize, path_seed: u64) -> Vec<Vec<f64>> {
    let set = problem.feasible_set();
    let d = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(path_seed);
    let mut x = random_point(set, &mut rng);
    let mut path = vec![x.clone()];
    for t in 0..steps {
        let dir: Vec<f64> = (0..d)
            .map(|_| {
                let u1: f64 = 1.0 - rng.random::<f64>();
                let u2: f64 = rng.random::<f64>();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let v = lmo(set, &dir).unwrap();
        let alpha = 2.0 / (t as f64 + 2.0);
        for i in 0..d {
            x[i] += alpha * (v[i] - x[i]);
        }
        path.push(x.clone());
    }
    path
}

/// Mean squared outer-level estimation error over replications at the two
/// probe indices.
pub fn storm_mse_on_path(
    problem: &ProblemInstance,
    path: &[Vec<f64>],
    reps: usize,
    probes: (usize, usize),
) -> (f64, f64) {
    let mut acc = (0.0, 0.0);
    for rep in 0..reps {
        let mut rngs = LevelRngs::from_seed(1000 + rep as u64);
        let (mut st, _) = StormState::init(problem, &path[0], &mut rngs);
        for (t, x) in path.iter().enumerate().skip(1) {
            let alpha = 2.0 / (t as f64 + 2.0);
            st.update(problem, x, alpha, &mut rngs);
            if t == probes.0 || t == probes.1 {
                let (ef, _) =
                    estimate_error(&EstimatorState::Storm(st.clone()), problem, x).unwrap();
                if t == probes.0 {
                    acc.0 += ef * ef;
                } else {
                    acc.1 += ef * ef;
                }
            }
        }
    }
    (acc.0 / reps as f64, acc.1 / reps as f64)
}

#[test]
fn storm_squared_error_halves_from_t100_to_t400() {
    // fixed quadratic finite-sum problem
    let data = RegressionData::generate(77, 60, 20, 60, 2.0, 0.3);
    let problem = data.to_problem();
    let path = frozen_path(&problem, 400, 4242);
    let (mse_100, mse_400) = storm_mse_on_path(&problem, &path, 50, (100, 400));
    assert!(
        mse_400 <= 0.5 * mse_100,
        "mse(400) = {mse_400}, mse(100) = {mse_100}"
    );
}

#[test]
fn storm_init_draws_one_component_per_level() {
    let data = RegressionData::generate(5, 2, 3, 2, 1.0, 0.2);
    let problem = data.to_problem();
    // on a 2-component oracle the initial estimate must be one of the two
    // component gradients, whichever seed is used
    let x0 = vec![0.1, 0.0, -0.1];
    let mut g0 = vec![0.0; 3];
    let mut g1 = vec![0.0; 3];
    problem.inner().grad_component(&x0, 0, &mut g0);
    problem.inner().grad_component(&x0, 1, &mut g1);
    let mut seen = [false, false];
    for seed in 0..32 {
        let mut rngs = LevelRngs::from_seed(seed);
        let (st, _) = StormState::init(&problem, &x0, &mut rngs);
        if st.est_g == g0 {
            seen[0] = true;
        } else if st.est_g == g1 {
            seen[1] = true;
        } else {
            panic!("estimate is not a component gradient");
        }
    }
    assert!(seen[0] && seen[1], "both components should appear: {seen:?}");
}

#[test]
fn storm_outer_inner_streams_are_independent() {
    // replacing the inner oracle must not change the outer sample sequence
    let d1 = RegressionData::generate(5, 4, 3, 4, 1.0, 0.2);
    let d2 = RegressionData::generate(6, 4, 3, 4, 1.0, 0.2);
    let p1 = d1.to_problem();
    let p2 = RegressionData {
        a_tr: d2.a_tr.clone(),
        b_tr: d2.b_tr.clone(),
        ..d1.clone()
    }
    .to_problem();
    let x0 = vec![0.0; 3];
    let path: Vec<Vec<f64>> = (0..20).map(|t| vec![0.01 * t as f64; 3]).collect();
    let run = |problem: &ProblemInstance| {
        let mut rngs = LevelRngs::from_seed(9);
        let (mut st, _) = StormState::init(problem, &x0, &mut rngs);
        for (t, x) in path.iter().enumerate().skip(1) {
            st.update(problem, x, 2.0 / (t as f64 + 2.0), &mut rngs);
        }
        st.est_f
    };
    assert_eq!(run(&p1), run(&p2));
}
