//! Iteratively regularized conditional-gradient solvers.
//!
//! Each iteration blends the two gradient estimates with a vanishing weight
//! `sigma_t`, takes one linear-minimization step on the feasible set, and
//! moves by a convex combination:
//!
//! ```text
//! v_t = lmo(sigma_t * est_F + est_G)
//! x_{t+1} = x_t + alpha_t * (v_t - x_t)
//! ```
//!
//! Iterates stay feasible with no projection. Alongside `x_t` the solver
//! maintains the weighted average `z_t` whose weights are built from the
//! regularization decrements `sigma_{i-1} - sigma_i`; the outer-gap guarantee
//! is stated for `z_t`, the inner gap holds for both.
//!
//! The module also hosts two deterministic reference procedures used to
//! produce gap baselines: a full-gradient conditional-gradient solve of the
//! inner problem with a duality-gap certificate, and a long noiseless run of
//! the regularized method to estimate the bilevel optimal value (which admits
//! no computable certificate).

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Budget, Method, ValidatedConfig};
use crate::error::{Error, Result};
use crate::estimators::{streams, EstimatorState, LevelRngs, SpiderState, StormState};
use crate::lmo::{contains, lmo, random_point};
use crate::problem::ProblemInstance;
use crate::trace::TraceRecord;
use crate::vecmath;

/// Incremental accumulators for the weighted averaged iterate.
///
/// After `t` completed steps the accumulators hold the weighted sum of
/// `x_i` over `i` in `(start_index, t]` with weights `(i+1) i (sigma_{i-1} -
/// sigma_i)`, all nonnegative since the regularization sequence is
/// non-increasing. Updates are O(d) per step.
#[derive(Debug, Clone)]
pub struct AveragingState {
    weighted_sum: Vec<f64>,
    weight_sum: f64,
    start_index: usize,
}

impl AveragingState {
    pub fn new(dim: usize, start_index: usize) -> Self {
        Self {
            weighted_sum: vec![0.0; dim],
            weight_sum: 0.0,
            start_index,
        }
    }

    /// Folds in the completed index `i` with its iterate `x_i`.
    pub fn push(&mut self, i: usize, x_i: &[f64], sigma_prev: f64, sigma_i: f64) {
        if i <= self.start_index {
            return;
        }
        let w = (i as f64 + 1.0) * i as f64 * (sigma_prev - sigma_i);
        vecmath::axpy(w, x_i, &mut self.weighted_sum);
        self.weight_sum += w;
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn weighted_sum(&self) -> &[f64] {
        &self.weighted_sum
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    /// The averaged iterate at step `t` with current iterate `x_t`:
    /// `((t+1) t sigma_t x_t + weighted_sum) / ((t+1) t sigma_t + weight_sum)`.
    pub fn averaged(&self, t: usize, x_t: &[f64], sigma_t: f64) -> Result<Vec<f64>> {
        let first = self.start_index.max(1);
        if t < first {
            return Err(Error::NotYetDefined { t, first });
        }
        let head = (t as f64 + 1.0) * t as f64 * sigma_t;
        let denom = head + self.weight_sum;
        let mut z = vec![0.0; x_t.len()];
        vecmath::axpy(head / denom, x_t, &mut z);
        vecmath::axpy(1.0 / denom, &self.weighted_sum, &mut z);
        Ok(z)
    }
}

/// Full mutable state of a run; everything needed to resume bitwise.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: Vec<f64>,
    /// Completed iterations; `x` is the iterate after `t` steps.
    pub t: usize,
    /// Lazily created on the first step (the first iteration's estimate *is*
    /// the initialization branch of the method).
    pub estimator: Option<EstimatorState>,
    pub avg: AveragingState,
    pub oracle_calls: u64,
    pub rngs: LevelRngs,
}

/// Drives one configured solver over one problem.
pub struct Runner<'a> {
    problem: &'a ProblemInstance,
    cfg: ValidatedConfig,
    state: SolverState,
    wall_accum_ms: f64,
    /// Record gradient-estimate error norms at checkpoints (costly: one full
    /// gradient per level per checkpoint; finite-sum only).
    pub record_est_err: bool,
}

impl<'a> Runner<'a> {
    /// Starts from a seeded random feasible point.
    pub fn new(problem: &'a ProblemInstance, cfg: ValidatedConfig) -> Result<Self> {
        let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        init_rng.set_stream(streams::INIT);
        let x0 = random_point(problem.feasible_set(), &mut init_rng);
        Self::with_start(problem, cfg, x0)
    }

    /// Starts from a caller-supplied feasible point.
    pub fn with_start(
        problem: &'a ProblemInstance,
        cfg: ValidatedConfig,
        x0: Vec<f64>,
    ) -> Result<Self> {
        if x0.len() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                got: x0.len(),
                context: "starting point",
            });
        }
        if !contains(problem.feasible_set(), &x0, 1e-9) {
            return Err(Error::InvalidConfig(vec![
                "starting point is not feasible".into(),
            ]));
        }
        let rngs = LevelRngs::from_seed(cfg.seed);
        let avg = AveragingState::new(problem.dim(), cfg.avg_start);
        Ok(Self {
            problem,
            cfg,
            state: SolverState {
                x: x0,
                t: 0,
                estimator: None,
                avg,
                oracle_calls: 0,
                rngs,
            },
            wall_accum_ms: 0.0,
            record_est_err: false,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn cfg(&self) -> &ValidatedConfig {
        &self.cfg
    }

    pub fn problem(&self) -> &ProblemInstance {
        self.problem
    }

    /// Current regularization weight.
    pub fn sigma(&self) -> f64 {
        self.cfg.sigma.eval(self.state.t)
    }

    /// Averaged iterate `z_t`, once defined.
    pub fn averaged_iterate(&self) -> Result<Vec<f64>> {
        self.state
            .avg
            .averaged(self.state.t, &self.state.x, self.sigma())
    }

    /// One iteration: refresh the gradient estimate at the current iterate,
    /// take the linear-minimization step, fold the new iterate into the
    /// averaging accumulators.
    pub fn step(&mut self) -> Result<()> {
        let t = self.state.t;
        let alpha_t = self.cfg.alpha.eval(t);
        let sigma_t = self.cfg.sigma.eval(t);

        let cost = match &mut self.state.estimator {
            None => {
                debug_assert_eq!(t, 0);
                let (est, cost) = match self.cfg.method {
                    Method::IrScg => {
                        let (s, c) =
                            StormState::init(self.problem, &self.state.x, &mut self.state.rngs);
                        (EstimatorState::Storm(s), c)
                    }
                    Method::IrFscg => {
                        let (s, c) = SpiderState::init(
                            self.problem,
                            &self.state.x,
                            self.cfg.q_outer,
                            self.cfg.q_inner,
                            self.cfg.batch_outer,
                            self.cfg.batch_inner,
                        )?;
                        (EstimatorState::Spider(s), c)
                    }
                };
                self.state.estimator = Some(est);
                cost
            }
            Some(EstimatorState::Storm(s)) => {
                s.update(self.problem, &self.state.x, alpha_t, &mut self.state.rngs)
            }
            Some(EstimatorState::Spider(s)) => {
                s.step(self.problem, &self.state.x, &mut self.state.rngs)
            }
        };
        self.state.oracle_calls += cost;

        let est = self.state.estimator.as_ref().expect("set above");
        let d = self.problem.dim();
        let mut dir = vec![0.0; d];
        for i in 0..d {
            dir[i] = sigma_t * est.est_f()[i] + est.est_g()[i];
        }
        let v = lmo(self.problem.feasible_set(), &dir)?;

        for i in 0..d {
            self.state.x[i] += alpha_t * (v[i] - self.state.x[i]);
        }
        if !vecmath::all_finite(&self.state.x) {
            return Err(Error::NumericalFailure { t: t + 1 });
        }

        let sigma_next = self.cfg.sigma.eval(t + 1);
        self.state.avg.push(t + 1, &self.state.x, sigma_t, sigma_next);
        self.state.t = t + 1;
        Ok(())
    }

    /// Runs until the budget is hit, recording a trace row every
    /// `checkpoint_every` steps (plus a final unaligned row). Iteration
    /// budgets count steps taken by this call, so `run(k)` followed by
    /// `run(m)` continues exactly where `run(k + m)` would be; oracle-call
    /// and wall-clock budgets are cumulative.
    pub fn run(&mut self, budget: &Budget) -> Result<Vec<TraceRecord>> {
        budget.validate()?;
        let started = Instant::now();
        let mut trace = Vec::new();
        let mut steps_here: u64 = 0;
        loop {
            if let Some(mi) = budget.max_iters {
                if steps_here >= mi {
                    break;
                }
            }
            if let Some(mo) = budget.max_oracle_calls {
                if self.state.oracle_calls >= mo {
                    break;
                }
            }
            if let Some(mw) = budget.max_wall_ms {
                if started.elapsed().as_millis() as u64 >= mw {
                    break;
                }
            }
            self.step()?;
            steps_here += 1;
            if self.state.t as u64 % self.cfg.checkpoint_every == 0 {
                let wall = self.wall_accum_ms + started.elapsed().as_secs_f64() * 1e3;
                trace.push(self.record(wall)?);
            }
        }
        if steps_here > 0 && self.state.t as u64 % self.cfg.checkpoint_every != 0 {
            let wall = self.wall_accum_ms + started.elapsed().as_secs_f64() * 1e3;
            trace.push(self.record(wall)?);
        }
        self.wall_accum_ms += started.elapsed().as_secs_f64() * 1e3;
        Ok(trace)
    }

    fn record(&self, wall_ms: f64) -> Result<TraceRecord> {
        let t = self.state.t;
        let sigma_t = self.cfg.sigma.eval(t);
        let alpha_t = self.cfg.alpha.eval(t);
        let mut rec = TraceRecord {
            t: t as u64,
            oracle_calls: self.state.oracle_calls,
            wall_ms,
            f_gap_x: None,
            g_gap_x: None,
            f_gap_z: None,
            g_gap_z: None,
            sigma_t,
            alpha_t,
            est_err: None,
        };
        if self.problem.is_finite_sum() {
            if let Some(refs) = self.problem.refs() {
                let (f_gap, g_gap) = gaps_at(self.problem, &self.state.x, refs)?;
                rec.f_gap_x = f_gap;
                rec.g_gap_x = Some(g_gap);
                if let Ok(z) = self.averaged_iterate() {
                    let (f_gap, g_gap) = gaps_at(self.problem, &z, refs)?;
                    rec.f_gap_z = f_gap;
                    rec.g_gap_z = Some(g_gap);
                }
            }
            if self.record_est_err {
                if let Some(est) = &self.state.estimator {
                    rec.est_err =
                        Some(crate::estimators::estimate_error(est, self.problem, est.x_sync())?);
                }
            }
        }
        Ok(rec)
    }
}

fn gaps_at(
    problem: &ProblemInstance,
    x: &[f64],
    refs: &crate::problem::ReferenceOptima,
) -> Result<(Option<f64>, f64)> {
    let g_gap = problem.inner().full_value(x) - refs.g_opt;
    if g_gap < -refs.g_tol {
        return Err(Error::StaleReference {
            gap: g_gap,
            tol: refs.g_tol,
        });
    }
    let f_gap = refs
        .f_opt
        .map(|f_opt| problem.outer().full_value(x) - f_opt);
    Ok((f_gap, g_gap))
}

/// Result of the certified inner solve.
#[derive(Debug, Clone)]
pub struct InnerReference {
    pub x: Vec<f64>,
    /// Certified lower bound on the inner optimal value: `G(x) - gap`.
    pub g_opt: f64,
    /// Inner objective at the returned point.
    pub g_at_x: f64,
    /// Final duality gap; by convexity `G(x) - G_opt <= gap`.
    pub gap: f64,
    pub iters: usize,
}

/// Deterministic full-gradient conditional gradient on the inner objective,
/// run until the duality gap `max_v grad^T (x - v)` drops to `eps`.
///
/// Steps use exact line search along the segment (safeguarded root find on
/// the directional derivative), which is what makes interior-optimum
/// instances converge fast enough to certify tight tolerances.
pub fn reference_inner(
    problem: &ProblemInstance,
    eps: f64,
    max_iters: usize,
) -> Result<InnerReference> {
    let inner = problem.inner();
    if !inner.is_finite_sum() {
        return Err(Error::MissingFiniteSum("inner reference solve"));
    }
    let set = problem.feasible_set();
    let d = problem.dim();
    let mut x = set.canonical_point();
    let mut g = vec![0.0; d];
    let mut best_gap = f64::INFINITY;
    let mut best: Option<InnerReference> = None;

    for k in 0..max_iters {
        inner.full_grad(&x, &mut g);
        let v = lmo(set, &g)?;
        let gap = vecmath::dot(&g, &x) - vecmath::dot(&g, &v);
        if gap < best_gap {
            best_gap = gap;
            let g_at_x = inner.full_value(&x);
            best = Some(InnerReference {
                x: x.clone(),
                g_opt: g_at_x - gap.max(0.0),
                g_at_x,
                gap,
                iters: k,
            });
        }
        if gap <= eps {
            return Ok(best.expect("just set"));
        }
        let dir: Vec<f64> = v.iter().zip(&x).map(|(vi, xi)| vi - xi).collect();
        let gamma = line_search(inner, &x, &dir, &mut g);
        vecmath::axpy(gamma, &dir, &mut x);
    }
    Err(Error::BudgetExhausted {
        best_gap,
        target: eps,
    })
}

/// Root find for `phi'(gamma) = grad(x + gamma d)^T d` on [0, 1]; `phi'` is
/// nondecreasing for a convex objective. Regula falsi with a bisection
/// safeguard; exact in one step for quadratics.
fn line_search(
    oracle: &dyn crate::problem::ComponentOracle,
    x: &[f64],
    dir: &[f64],
    scratch: &mut [f64],
) -> f64 {
    let deriv = |gamma: f64, scratch: &mut [f64]| -> f64 {
        let y: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + gamma * di).collect();
        oracle.full_grad(&y, scratch);
        vecmath::dot(scratch, dir)
    };
    let mut lo = 0.0;
    let mut f_lo = deriv(0.0, scratch);
    if f_lo >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut f_hi = deriv(1.0, scratch);
    if f_hi <= 0.0 {
        return 1.0;
    }
    let mut gamma = 0.5;
    for _ in 0..64 {
        // secant point, guarded to stay inside the bracket
        let mut cand = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        if !(cand > lo && cand < hi) {
            cand = 0.5 * (lo + hi);
        }
        let f_cand = deriv(cand, scratch);
        gamma = cand;
        if f_cand.abs() <= 1e-15 || hi - lo <= 1e-15 {
            break;
        }
        if f_cand < 0.0 {
            lo = cand;
            f_lo = f_cand;
        } else {
            hi = cand;
            f_hi = f_cand;
        }
    }
    gamma
}

/// Result of the long noiseless bilevel reference run.
#[derive(Debug, Clone)]
pub struct BilevelReference {
    /// Estimated bilevel optimal value `F(z_T)`.
    pub f_opt: f64,
    /// Honest tolerance: residual inner gap plus the trailing decrement of
    /// the outer objective over the last half of the run.
    pub f_tol: f64,
    pub inner_gap: f64,
    pub iters: usize,
    pub z: Vec<f64>,
}

/// Long noiseless run of the regularized conditional-gradient method with
/// exact gradients, `sigma_t` decaying with exponent 1/2 and the standard
/// `2/(t+2)` stepsize. Returns `F` at the final averaged iterate as the
/// bilevel value estimate. There is no dual certificate for this quantity;
/// downstream thresholds must stand well above `f_tol`.
pub fn reference_bilevel(
    problem: &ProblemInstance,
    g_opt: f64,
    varsigma: f64,
    iters: usize,
) -> Result<BilevelReference> {
    if !problem.is_finite_sum() {
        return Err(Error::MissingFiniteSum("bilevel reference solve"));
    }
    if iters < 4 {
        return Err(Error::InvalidConfig(vec![
            "bilevel reference needs at least 4 iterations".into(),
        ]));
    }
    let set = problem.feasible_set();
    let d = problem.dim();
    let sigma = |t: usize| varsigma * (t as f64 + 1.0).powf(-0.5);
    let mut x = set.canonical_point();
    let mut avg = AveragingState::new(d, 0);
    let mut gf = vec![0.0; d];
    let mut gg = vec![0.0; d];
    let mut dir = vec![0.0; d];
    let mut f_half = f64::NAN;
    let half = iters / 2;
    for t in 0..iters {
        let s = sigma(t);
        problem.outer().full_grad(&x, &mut gf);
        problem.inner().full_grad(&x, &mut gg);
        for i in 0..d {
            dir[i] = s * gf[i] + gg[i];
        }
        let v = lmo(set, &dir)?;
        let alpha = 2.0 / (t as f64 + 2.0);
        for i in 0..d {
            x[i] += alpha * (v[i] - x[i]);
        }
        avg.push(t + 1, &x, s, sigma(t + 1));
        if t + 1 == half {
            let z = avg.averaged(t + 1, &x, sigma(t + 1))?;
            f_half = problem.outer().full_value(&z);
        }
    }
    let z = avg.averaged(iters, &x, sigma(iters))?;
    let f_opt = problem.outer().full_value(&z);
    let inner_gap = problem.inner().full_value(&z) - g_opt;
    let f_tol = inner_gap.max(0.0) + (f_opt - f_half).abs();
    Ok(BilevelReference {
        f_opt,
        f_tol,
        inner_gap,
        iters,
        z,
    })
}
