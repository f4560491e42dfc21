//! Variance-reduced gradient estimators, one state per objective level.
//!
//! Two schemes are provided. The recursive-momentum estimator draws a single
//! fresh sample per level per iteration and evaluates it at the current and
//! previous iterate:
//!
//! ```text
//! est_t = (1 - alpha_t) * est_{t-1} + grad(x_t, s_t) - (1 - alpha_t) * grad(x_{t-1}, s_t)
//! ```
//!
//! The path-integrated estimator recomputes the exact full gradient every `q`
//! iterations and otherwise adds a shared-sample mini-batch difference:
//!
//! ```text
//! est_t = est_{t-1} + grad_batch(x_t) - grad_batch(x_{t-1})
//! ```
//!
//! The batch is drawn i.i.d. uniform with replacement and the *same* indices
//! are used at both evaluation points. Resets consume no randomness.
//!
//! The outer and inner levels draw from independent generator streams derived
//! from the master seed, so the two sample sequences never interleave.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{ComponentOracle, ProblemInstance};
use crate::vecmath;

/// Stream ids for deriving per-purpose generators from one master seed.
pub mod streams {
    /// Starting-point draw.
    pub const INIT: u64 = 0;
    /// Outer-level sample draws.
    pub const OUTER: u64 = 1;
    /// Inner-level sample draws.
    pub const INNER: u64 = 2;
}

/// Independent per-level generators.
#[derive(Debug, Clone)]
pub struct LevelRngs {
    pub outer: ChaCha8Rng,
    pub inner: ChaCha8Rng,
}

impl LevelRngs {
    pub fn from_seed(seed: u64) -> Self {
        let mut outer = ChaCha8Rng::seed_from_u64(seed);
        outer.set_stream(streams::OUTER);
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(streams::INNER);
        Self { outer, inner }
    }
}

fn draw_id(oracle: &dyn ComponentOracle, rng: &mut ChaCha8Rng) -> u64 {
    match oracle.n_components() {
        Some(n) => rng.random_range(0..n as u64),
        None => rng.next_u64(),
    }
}

/// Recursive-momentum estimator state.
#[derive(Debug, Clone)]
pub struct StormState {
    pub est_f: Vec<f64>,
    pub est_g: Vec<f64>,
    pub t: usize,
    pub x_prev: Vec<f64>,
}

impl StormState {
    /// Estimate at the starting point: one fresh component gradient per
    /// level. Returns the state and the component evaluations consumed.
    pub fn init(problem: &ProblemInstance, x0: &[f64], rngs: &mut LevelRngs) -> (Self, u64) {
        let d = problem.dim();
        let mut est_f = vec![0.0; d];
        let mut est_g = vec![0.0; d];
        let id_f = draw_id(problem.outer(), &mut rngs.outer);
        problem.outer().grad_component(x0, id_f, &mut est_f);
        let id_g = draw_id(problem.inner(), &mut rngs.inner);
        problem.inner().grad_component(x0, id_g, &mut est_g);
        (
            Self {
                est_f,
                est_g,
                t: 0,
                x_prev: x0.to_vec(),
            },
            2,
        )
    }

    /// Momentum update to iterate `x_t`. Draws one fresh sample per level and
    /// evaluates it at `x_t` and at the stored previous iterate: exactly two
    /// component evaluations per level. Returns the evaluations consumed.
    pub fn update(
        &mut self,
        problem: &ProblemInstance,
        x_t: &[f64],
        alpha_t: f64,
        rngs: &mut LevelRngs,
    ) -> u64 {
        let d = problem.dim();
        let mut g_new = vec![0.0; d];
        let mut g_prev = vec![0.0; d];
        for (oracle, rng, est) in [
            (problem.outer(), &mut rngs.outer, &mut self.est_f),
            (problem.inner(), &mut rngs.inner, &mut self.est_g),
        ] {
            let id = draw_id(oracle, rng);
            oracle.grad_component(x_t, id, &mut g_new);
            oracle.grad_component(&self.x_prev, id, &mut g_prev);
            let keep = 1.0 - alpha_t;
            for i in 0..d {
                est[i] = keep * est[i] + g_new[i] - keep * g_prev[i];
            }
        }
        self.x_prev.copy_from_slice(x_t);
        self.t += 1;
        4
    }
}

/// Path-integrated estimator state with per-level reset periods and batch
/// sizes.
#[derive(Debug, Clone)]
pub struct SpiderState {
    pub est_f: Vec<f64>,
    pub est_g: Vec<f64>,
    pub t: usize,
    pub q_outer: usize,
    pub q_inner: usize,
    pub batch_outer: usize,
    pub batch_inner: usize,
    pub x_prev: Vec<f64>,
}

impl SpiderState {
    /// State at `t = 0`: both levels take an exact full-gradient reset.
    /// Returns the state and the component evaluations consumed.
    pub fn init(
        problem: &ProblemInstance,
        x0: &[f64],
        q_outer: usize,
        q_inner: usize,
        batch_outer: usize,
        batch_inner: usize,
    ) -> Result<(Self, u64)> {
        let (n_f, n_g) = finite_sum_sizes(problem)?;
        let d = problem.dim();
        let mut est_f = vec![0.0; d];
        let mut est_g = vec![0.0; d];
        problem.outer().full_grad(x0, &mut est_f);
        problem.inner().full_grad(x0, &mut est_g);
        Ok((
            Self {
                est_f,
                est_g,
                t: 0,
                q_outer,
                q_inner,
                batch_outer,
                batch_inner,
                x_prev: x0.to_vec(),
            },
            (n_f + n_g) as u64,
        ))
    }

    /// Advances to iterate `x_t`. A level whose period divides the new index
    /// recomputes its exact full gradient (no randomness, `n` evaluations);
    /// otherwise it draws a fresh batch and applies the gradient difference
    /// between `x_t` and the previous iterate (`2 * batch` evaluations).
    pub fn step(&mut self, problem: &ProblemInstance, x_t: &[f64], rngs: &mut LevelRngs) -> u64 {
        let d = problem.dim();
        let t_new = self.t + 1;
        let mut cost = 0u64;
        let mut g_new = vec![0.0; d];
        let mut g_prev = vec![0.0; d];
        for (oracle, rng, est, q, batch) in [
            (
                problem.outer(),
                &mut rngs.outer,
                &mut self.est_f,
                self.q_outer,
                self.batch_outer,
            ),
            (
                problem.inner(),
                &mut rngs.inner,
                &mut self.est_g,
                self.q_inner,
                self.batch_inner,
            ),
        ] {
            let n = oracle
                .n_components()
                .expect("validated as finite-sum") as u64;
            if t_new % q == 0 {
                oracle.full_grad(x_t, est);
                cost += n;
            } else {
                g_new.fill(0.0);
                g_prev.fill(0.0);
                let mut buf = vec![0.0; d];
                for _ in 0..batch {
                    let id = rng.random_range(0..n);
                    oracle.grad_component(x_t, id, &mut buf);
                    vecmath::axpy(1.0, &buf, &mut g_new);
                    oracle.grad_component(&self.x_prev, id, &mut buf);
                    vecmath::axpy(1.0, &buf, &mut g_prev);
                }
                let inv = 1.0 / batch as f64;
                for i in 0..d {
                    est[i] += inv * (g_new[i] - g_prev[i]);
                }
                cost += 2 * batch as u64;
            }
        }
        self.x_prev.copy_from_slice(x_t);
        self.t = t_new;
        cost
    }
}

fn finite_sum_sizes(problem: &ProblemInstance) -> Result<(usize, usize)> {
    let n_f = problem
        .n_outer()
        .ok_or(Error::MissingFiniteSum("outer oracle is streaming"))?;
    let n_g = problem
        .n_inner()
        .ok_or(Error::MissingFiniteSum("inner oracle is streaming"))?;
    Ok((n_f, n_g))
}

/// Either estimator, as held by a solver run.
#[derive(Debug, Clone)]
pub enum EstimatorState {
    Storm(StormState),
    Spider(SpiderState),
}

impl EstimatorState {
    pub fn est_f(&self) -> &[f64] {
        match self {
            EstimatorState::Storm(s) => &s.est_f,
            EstimatorState::Spider(s) => &s.est_f,
        }
    }

    pub fn est_g(&self) -> &[f64] {
        match self {
            EstimatorState::Storm(s) => &s.est_g,
            EstimatorState::Spider(s) => &s.est_g,
        }
    }

    pub fn t(&self) -> usize {
        match self {
            EstimatorState::Storm(s) => s.t,
            EstimatorState::Spider(s) => s.t,
        }
    }

    /// Iterate the estimate is synced to.
    pub fn x_sync(&self) -> &[f64] {
        match self {
            EstimatorState::Storm(s) => &s.x_prev,
            EstimatorState::Spider(s) => &s.x_prev,
        }
    }
}

/// Euclidean norms of the estimation errors against the exact gradients at
/// `x`, per level. Costs one full gradient per level.
pub fn estimate_error(
    est: &EstimatorState,
    problem: &ProblemInstance,
    x: &[f64],
) -> Result<(f64, f64)> {
    let (_, _) = finite_sum_sizes(problem).map_err(|_| Error::StreamingOracle("estimate_error"))?;
    let d = problem.dim();
    let mut exact = vec![0.0; d];
    problem.outer().full_grad(x, &mut exact);
    let err_f = vecmath::dist2(est.est_f(), &exact);
    problem.inner().full_grad(x, &mut exact);
    let err_g = vecmath::dist2(est.est_g(), &exact);
    Ok((err_f, err_g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmo::FeasibleSet;

    /// `h_i(x) = 0.5 ||x - c_i||^2`; all components share the identity
    /// Hessian, so batch gradient differences equal the full difference.
    struct ShiftedQuad {
        dim: usize,
        centers: Vec<Vec<f64>>,
    }

    impl ShiftedQuad {
        fn problem(centers_f: Vec<Vec<f64>>, centers_g: Vec<Vec<f64>>) -> ProblemInstance {
            let dim = centers_f[0].len();
            ProblemInstance::new(
                FeasibleSet::l2_ball(10.0, dim),
                Box::new(ShiftedQuad {
                    dim,
                    centers: centers_f,
                }),
                Box::new(ShiftedQuad {
                    dim,
                    centers: centers_g,
                }),
            )
            .unwrap()
        }
    }

    impl ComponentOracle for ShiftedQuad {
        fn n_components(&self) -> Option<usize> {
            Some(self.centers.len())
        }
        fn dim(&self) -> usize {
            self.dim
        }
        fn grad_component(&self, x: &[f64], id: u64, out: &mut [f64]) {
            let c = &self.centers[id as usize];
            for i in 0..self.dim {
                out[i] = x[i] - c[i];
            }
        }
        fn value_component(&self, x: &[f64], id: u64) -> f64 {
            let c = &self.centers[id as usize];
            0.5 * x
                .iter()
                .zip(c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        }
    }

    #[test]
    fn storm_recursion_direct_substitution() {
        // prev est (1,0), fresh grad at x_t (2,2), at x_prev (1,1), alpha 0.5
        let mut est = vec![1.0, 0.0];
        let (g_new, g_prev, alpha) = (vec![2.0, 2.0], vec![1.0, 1.0], 0.5);
        for i in 0..2 {
            est[i] = (1.0 - alpha) * est[i] + g_new[i] - (1.0 - alpha) * g_prev[i];
        }
        assert_eq!(est, vec![2.0, 1.5]);
    }

    #[test]
    fn spider_difference_direct_substitution() {
        let mut est = vec![1.0, 1.0];
        let (g_new, g_prev) = (vec![0.0, 2.0], vec![1.0, 0.0]);
        for i in 0..2 {
            est[i] += g_new[i] - g_prev[i];
        }
        assert_eq!(est, vec![0.0, 3.0]);
    }

    #[test]
    fn storm_single_component_tracks_exact_gradient() {
        let problem = ShiftedQuad::problem(vec![vec![1.0, -1.0]], vec![vec![0.5, 0.5]]);
        let mut rngs = LevelRngs::from_seed(7);
        let x0 = vec![0.2, 0.3];
        let (mut st, cost) = StormState::init(&problem, &x0, &mut rngs);
        assert_eq!(cost, 2);
        let mut x = x0;
        let mut total = cost;
        for t in 1..=1000usize {
            for xi in x.iter_mut() {
                *xi *= 0.99;
            }
            total += st.update(&problem, &x, 2.0 / (t as f64 + 2.0), &mut rngs);
            let (ef, eg) = estimate_error(&EstimatorState::Storm(st.clone()), &problem, &x).unwrap();
            assert!(ef <= 1e-10 && eg <= 1e-10, "t={t}: {ef} {eg}");
        }
        // one eval per level at init, two per level per update
        assert_eq!(total, 2 + 4 * 1000);
    }

    #[test]
    fn storm_alpha_one_resets_to_fresh_gradient() {
        let problem = ShiftedQuad::problem(vec![vec![2.0]], vec![vec![-1.0]]);
        let mut rngs = LevelRngs::from_seed(1);
        let (mut st, _) = StormState::init(&problem, &[5.0], &mut rngs);
        st.est_f = vec![123.0]; // garbage momentum
        st.update(&problem, &[3.0], 1.0, &mut rngs);
        assert_eq!(st.est_f, vec![3.0 - 2.0]);
    }

    #[test]
    fn storm_same_seed_same_state() {
        let problem = ShiftedQuad::problem(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.5, 0.5], vec![1.5, 0.0]],
        );
        let run = |seed: u64| {
            let mut rngs = LevelRngs::from_seed(seed);
            let (mut st, _) = StormState::init(&problem, &[0.1, 0.1], &mut rngs);
            st.update(&problem, &[0.0, 0.2], 0.5, &mut rngs);
            st
        };
        let (a, b) = (run(5), run(5));
        assert_eq!(a.est_f, b.est_f);
        assert_eq!(a.est_g, b.est_g);
    }

    #[test]
    fn spider_reset_invariant_and_accounting() {
        let problem = ShiftedQuad::problem(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 2.0]],
            vec![vec![0.5, 0.5], vec![1.5, 0.0], vec![0.0, 0.0]],
        );
        let q = 4;
        let s = 2;
        let mut rngs = LevelRngs::from_seed(11);
        let x0 = vec![0.3, -0.2];
        let (mut sp, cost0) = SpiderState::init(&problem, &x0, q, q, s, s).unwrap();
        assert_eq!(cost0, 6); // n per level
        let mut x = x0;
        let mut total = cost0;
        for t in 1..=40usize {
            x[0] = 0.3 * (1.0 - t as f64 / 50.0);
            x[1] = -0.2 + t as f64 / 100.0;
            total += sp.step(&problem, &x, &mut rngs);
            if t % q == 0 {
                let (ef, eg) =
                    estimate_error(&EstimatorState::Spider(sp.clone()), &problem, &x).unwrap();
                assert!(ef <= 1e-12 && eg <= 1e-12);
            }
        }
        // ceil((t+1)/q)*n + (t+1 - ceil((t+1)/q))*2S per level, t+1 = 41 steps
        let steps = 41u64;
        let resets = steps.div_ceil(q as u64);
        let expect_per_level = resets * 3 + (steps - resets) * (2 * s as u64);
        assert_eq!(total, 2 * expect_per_level);
    }

    #[test]
    fn zero_noise_components_give_exact_estimates() {
        // every component equals the mean
        let c = vec![0.7, -0.4];
        let problem = ShiftedQuad::problem(vec![c.clone(); 5], vec![c.clone(); 5]);
        let mut rngs = LevelRngs::from_seed(3);
        let x0 = vec![1.0, 1.0];
        let (mut st, _) = StormState::init(&problem, &x0, &mut rngs);
        let (mut sp, _) = SpiderState::init(&problem, &x0, 3, 3, 1, 1).unwrap();
        let mut x = x0;
        for t in 1..=200usize {
            x[0] = (t as f64 * 0.7).sin();
            x[1] = (t as f64 * 0.3).cos();
            st.update(&problem, &x, 2.0 / (t as f64 + 2.0), &mut rngs);
            sp.step(&problem, &x, &mut rngs);
            let (ef, _) = estimate_error(&EstimatorState::Storm(st.clone()), &problem, &x).unwrap();
            let (_, eg) =
                estimate_error(&EstimatorState::Spider(sp.clone()), &problem, &x).unwrap();
            assert!(ef <= 1e-10 && eg <= 1e-10);
        }
    }

    #[test]
    fn estimate_error_rejects_streaming() {
        struct Streaming;
        impl ComponentOracle for Streaming {
            fn n_components(&self) -> Option<usize> {
                None
            }
            fn dim(&self) -> usize {
                1
            }
            fn grad_component(&self, x: &[f64], _id: u64, out: &mut [f64]) {
                out[0] = x[0];
            }
            fn value_component(&self, x: &[f64], _id: u64) -> f64 {
                0.5 * x[0] * x[0]
            }
        }
        let problem = ProblemInstance::new(
            FeasibleSet::l2_ball(1.0, 1),
            Box::new(Streaming),
            Box::new(Streaming),
        )
        .unwrap();
        let mut rngs = LevelRngs::from_seed(0);
        let (st, _) = StormState::init(&problem, &[0.0], &mut rngs);
        assert!(matches!(
            estimate_error(&EstimatorState::Storm(st), &problem, &[0.0]),
            Err(Error::StreamingOracle(_))
        ));
    }
}
