//! Finite-difference gate for every problem generator, plus mean-consistency
//! and convexity spot checks on the generated oracles.

use ircg::lmo::random_point;
use ircg::problem::{ComponentOracle, ProblemInstance};
use ircg::problems::{DictionaryData, LogisticData, RegressionData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Central finite differences of component values against the component
/// gradient, all coordinates, one random component per point.
pub fn fd_gate(problem: &ProblemInstance, oracle: &dyn ComponentOracle, points: usize, seed: u64) {
    let d = problem.dim();
    let n = oracle.n_components().unwrap() as u64;
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grad = vec![0.0; d];
    for pt in 0..points {
        let x = random_point(problem.feasible_set(), &mut rng);
        let id = rng.random_range(0..n);
        oracle.grad_component(&x, id, &mut grad);
        let mut xp = x.clone();
        for j in 0..d {
            let orig = x[j];
            xp[j] = orig + h;
            let up = oracle.value_component(&xp, id);
            xp[j] = orig - h;
            let dn = oracle.value_component(&xp, id);
            xp[j] = orig;
            let fd = (up - dn) / (2.0 * h);
            let scale = grad[j].abs().max(fd.abs()).max(1.0);
            assert!(
                (fd - grad[j]).abs() <= 1e-5 * scale,
                "point {pt}, component {id}, coord {j}: fd {fd} vs grad {}",
                grad[j]
            );
        }
    }
}

fn mean_consistency(problem: &ProblemInstance, oracle: &dyn ComponentOracle, seed: u64) {
    let n = oracle.n_components().unwrap() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 {
        let x = random_point(problem.feasible_set(), &mut rng);
        let full = oracle.full_value(&x);
        let mean = (0..n).map(|id| oracle.value_component(&x, id)).sum::<f64>() / n as f64;
        assert!((full - mean).abs() <= 1e-10 * mean.abs().max(1.0));
    }
}

fn convexity_spot_check(problem: &ProblemInstance, oracle: &dyn ComponentOracle, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let x = random_point(problem.feasible_set(), &mut rng);
        let y = random_point(problem.feasible_set(), &mut rng);
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let lhs = oracle.full_value(&mid);
        let rhs = 0.5 * oracle.full_value(&x) + 0.5 * oracle.full_value(&y);
        assert!(lhs <= rhs + 1e-9, "convexity violated: {lhs} > {rhs}");
    }
}

#[test]
fn regression_gradients_pass_fd_gate() {
    let problem = RegressionData::generate(13, 8, 5, 8, 2.0, 0.1).to_problem();
    fd_gate(&problem, problem.inner(), 50, 100);
    fd_gate(&problem, problem.outer(), 50, 101);
    mean_consistency(&problem, problem.inner(), 200);
    mean_consistency(&problem, problem.outer(), 201);
    convexity_spot_check(&problem, problem.inner(), 300);
    convexity_spot_check(&problem, problem.outer(), 301);
}

#[test]
fn logistic_gradients_pass_fd_gate() {
    let problem = LogisticData::generate(13, 12, 6, 5.0).to_problem();
    fd_gate(&problem, problem.inner(), 50, 110);
    fd_gate(&problem, problem.outer(), 50, 111);
    mean_consistency(&problem, problem.inner(), 210);
    convexity_spot_check(&problem, problem.inner(), 310);
    convexity_spot_check(&problem, problem.outer(), 311);
}

#[test]
fn dictionary_gradients_pass_fd_gate() {
    let data = DictionaryData::generate(13, 3, 2, 4, 4, 3, 3.0);
    let problem = data.to_problem();
    fd_gate(&problem, problem.inner(), 50, 120);
    fd_gate(&problem, problem.outer(), 50, 121);
    mean_consistency(&problem, problem.inner(), 220);
    mean_consistency(&problem, problem.outer(), 221);
    // only the inner level is convex here
    convexity_spot_check(&problem, problem.inner(), 320);
}
