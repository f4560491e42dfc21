//! Solver configuration and validation.

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::schedules::{AlphaSchedule, SigmaSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// One-sample recursive-momentum estimator, single fresh sample per level
    /// per iteration.
    IrScg,
    /// Finite-sum path-integrated estimator with periodic exact resets.
    IrFscg,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::IrScg => "ir-scg",
            Method::IrFscg => "ir-fscg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchedulePreset {
    #[default]
    Convex,
    Nonconvex,
}

/// Iteration / oracle-call / wall-clock stopping rule. At least one of the
/// first two must be set; the wall-clock limit is an extra, non-reproducible
/// cutoff used by benchmark sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Budget {
    pub max_iters: Option<u64>,
    pub max_oracle_calls: Option<u64>,
    pub max_wall_ms: Option<u64>,
}

impl Budget {
    pub fn iters(n: u64) -> Self {
        Budget {
            max_iters: Some(n),
            ..Default::default()
        }
    }

    pub fn oracle_calls(n: u64) -> Self {
        Budget {
            max_oracle_calls: Some(n),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters.is_none() && self.max_oracle_calls.is_none() {
            return Err(Error::BudgetZero);
        }
        Ok(())
    }
}

/// User-facing solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub preset: SchedulePreset,
    /// Regularization scale (the multiplier in front of the power decay).
    pub varsigma: f64,
    /// Regularization decay exponent; `None` picks the preset default.
    pub p: Option<f64>,
    /// Stepsize decay exponent, nonconvex preset only; `None` picks the
    /// preset default.
    pub omega: Option<f64>,
    /// Reset period; `None` defaults to `floor(sqrt(n))` per level.
    pub q: Option<usize>,
    /// Mini-batch size; `None` defaults to `floor(sqrt(n))` per level.
    pub batch: Option<usize>,
    /// Use `2/(t+1)` instead of `2/(t+2)` after the warm phase (finite-sum
    /// convex preset only).
    pub alpha_t_plus_1_variant: bool,
    pub seed: u64,
    pub budget: Budget,
    pub checkpoint_every: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::IrScg,
            preset: SchedulePreset::Convex,
            varsigma: 1.0,
            p: None,
            omega: None,
            q: None,
            batch: None,
            alpha_t_plus_1_variant: false,
            seed: 0,
            budget: Budget::default(),
            checkpoint_every: 100,
        }
    }
}

/// Configuration after validation: exponents filled in, per-level periods and
/// batch sizes resolved, schedules constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    pub method: Method,
    pub preset: SchedulePreset,
    pub varsigma: f64,
    pub p: f64,
    pub omega: Option<f64>,
    /// Outer-level reset period / batch size (finite-sum method only).
    pub q_outer: usize,
    pub batch_outer: usize,
    /// Inner-level reset period / batch size.
    pub q_inner: usize,
    pub batch_inner: usize,
    /// Period used by the stepsize/regularization schedules and the averaging
    /// guard: the larger of the two per-level periods.
    pub q_schedule: usize,
    pub alpha_t_plus_1_variant: bool,
    pub seed: u64,
    pub budget: Budget,
    pub checkpoint_every: u64,
    pub alpha: AlphaSchedule,
    pub sigma: SigmaSchedule,
    /// First index at which the averaged iterate is defined.
    pub avg_start: usize,
    /// The normalized user-facing config (defaults resolved); validating it
    /// again yields the same result.
    pub normalized: SolverConfig,
}

fn default_p(method: Method, preset: SchedulePreset) -> f64 {
    match (method, preset) {
        (Method::IrScg, SchedulePreset::Convex) => 0.25,
        (Method::IrFscg, SchedulePreset::Convex) => 0.5,
        (Method::IrScg, SchedulePreset::Nonconvex) => 2.0 / 7.0,
        (Method::IrFscg, SchedulePreset::Nonconvex) => 0.5,
    }
}

fn default_omega(method: Method) -> f64 {
    match method {
        Method::IrScg => 6.0 / 7.0,
        Method::IrFscg => 0.75,
    }
}

fn sqrt_floor(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

/// Checks a configuration against a problem and resolves all defaults.
///
/// On top of range checks this verifies the schedule the configuration
/// implies: the regularization sequence must be positive, non-increasing, and
/// vanishing; the one-sample convex preset additionally needs `p < 1/2` so
/// that `t * sigma_t^2` grows without bound; the finite-sum sequence must
/// hold its plateau through the warm phase.
pub fn validate(problem: &ProblemInstance, config: &SolverConfig) -> Result<ValidatedConfig> {
    let mut violations: Vec<String> = Vec::new();

    let p = config.p.unwrap_or_else(|| default_p(config.method, config.preset));
    let omega = match config.preset {
        SchedulePreset::Nonconvex => {
            Some(config.omega.unwrap_or_else(|| default_omega(config.method)))
        }
        SchedulePreset::Convex => {
            if config.omega.is_some() {
                violations.push("omega is only meaningful with the nonconvex preset".into());
            }
            None
        }
    };

    if config.varsigma <= 0.0 || !config.varsigma.is_finite() {
        violations.push(format!("varsigma must be positive, got {}", config.varsigma));
    }
    if config.checkpoint_every == 0 {
        violations.push("checkpoint_every must be >= 1".into());
    }

    match (config.method, config.preset) {
        (Method::IrScg, SchedulePreset::Convex) => {
            if !(p > 0.0 && p < 0.5) {
                return Err(Error::InvalidExponent {
                    value: p,
                    context: "one-sample convex preset",
                    expected: "p in (0, 1/2)",
                });
            }
        }
        (Method::IrFscg, SchedulePreset::Convex) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidExponent {
                    value: p,
                    context: "finite-sum convex preset",
                    expected: "p in (0, 1)",
                });
            }
        }
        (_, SchedulePreset::Nonconvex) => {
            let w = omega.unwrap();
            if !(p > 0.0 && p <= w && w < 1.0) {
                return Err(Error::InvalidExponent {
                    value: p,
                    context: "nonconvex preset",
                    expected: "0 < p <= omega < 1",
                });
            }
        }
    }

    if let Some(q) = config.q {
        if q < 1 {
            violations.push("q must be >= 1".into());
        }
    }
    if let Some(b) = config.batch {
        if b < 1 {
            violations.push("batch must be >= 1".into());
        }
    }

    // Per-level periods and batch sizes (finite-sum method only).
    let (q_outer, q_inner, batch_outer, batch_inner) = match config.method {
        Method::IrFscg => {
            let (n_outer, n_inner) = match (problem.n_outer(), problem.n_inner()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::MissingFiniteSum("ir-fscg needs finite-sum oracles")),
            };
            let qo = config.q.unwrap_or_else(|| sqrt_floor(n_outer));
            let qi = config.q.unwrap_or_else(|| sqrt_floor(n_inner));
            let bo = config.batch.unwrap_or_else(|| sqrt_floor(n_outer));
            let bi = config.batch.unwrap_or_else(|| sqrt_floor(n_inner));
            (qo, qi, bo, bi)
        }
        Method::IrScg => (1, 1, 1, 1),
    };
    let q_schedule = q_outer.max(q_inner);

    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }

    let alpha = match (config.method, config.preset) {
        (Method::IrScg, SchedulePreset::Convex) => AlphaSchedule::Convex,
        (Method::IrScg, SchedulePreset::Nonconvex) => AlphaSchedule::Nonconvex {
            omega: omega.unwrap(),
        },
        (Method::IrFscg, SchedulePreset::Convex) => AlphaSchedule::WarmThenConvex {
            q: q_schedule,
            variant_t_plus_1: config.alpha_t_plus_1_variant,
        },
        (Method::IrFscg, SchedulePreset::Nonconvex) => AlphaSchedule::WarmThenNonconvex {
            q: q_schedule,
            omega: omega.unwrap(),
        },
    };
    let sigma = match (config.method, config.preset) {
        (Method::IrScg, _) => SigmaSchedule::OneSample {
            varsigma: config.varsigma,
            p,
        },
        (Method::IrFscg, SchedulePreset::Convex) => SigmaSchedule::FiniteSum {
            varsigma: config.varsigma,
            p,
            q: q_schedule,
        },
        (Method::IrFscg, SchedulePreset::Nonconvex) => SigmaSchedule::NonconvexFs {
            varsigma: config.varsigma,
            p,
            q: q_schedule,
        },
    };

    // Spot-check the resolved sigma sequence: positive, non-increasing, and
    // (finite-sum) constant through the warm phase.
    let mut prev = f64::INFINITY;
    for t in 0..=(2 * q_schedule + 16) {
        let v = sigma.eval(t);
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidConfig(vec![format!(
                "sigma_{t} = {v} is not positive finite"
            )]));
        }
        if v > prev {
            return Err(Error::InvalidConfig(vec![format!(
                "sigma sequence increases at t = {t}"
            )]));
        }
        prev = v;
    }
    if config.method == Method::IrFscg {
        let s0 = sigma.eval(0);
        for t in 0..=q_schedule {
            if sigma.eval(t) != s0 {
                return Err(Error::InvalidConfig(vec![format!(
                    "sigma must stay at its initial value through t = {q_schedule}, broke at t = {t}"
                )]));
            }
        }
    }

    let avg_start = match config.method {
        Method::IrScg => 0,
        Method::IrFscg => q_schedule,
    };

    let normalized = SolverConfig {
        p: Some(p),
        omega,
        q: config.q,
        batch: config.batch,
        ..config.clone()
    };

    Ok(ValidatedConfig {
        method: config.method,
        preset: config.preset,
        varsigma: config.varsigma,
        p,
        omega,
        q_outer,
        batch_outer,
        q_inner,
        batch_inner,
        q_schedule,
        alpha_t_plus_1_variant: config.alpha_t_plus_1_variant,
        seed: config.seed,
        budget: config.budget,
        checkpoint_every: config.checkpoint_every,
        alpha,
        sigma,
        avg_start,
        normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::regression::RegressionData;

    fn problem() -> ProblemInstance {
        RegressionData::generate(3, 16, 4, 16, 2.0, 0.0).to_problem()
    }

    fn cfg(method: Method, p: f64) -> SolverConfig {
        SolverConfig {
            method,
            p: Some(p),
            budget: Budget::iters(10),
            ..Default::default()
        }
    }

    #[test]
    fn scg_accepts_quarter_rejects_three_quarters() {
        let prob = problem();
        assert!(validate(&prob, &cfg(Method::IrScg, 0.25)).is_ok());
        assert!(matches!(
            validate(&prob, &cfg(Method::IrScg, 0.75)),
            Err(Error::InvalidExponent { .. })
        ));
    }

    #[test]
    fn fscg_defaults_q_to_sqrt_n() {
        let prob = problem();
        let v = validate(&prob, &cfg(Method::IrFscg, 0.5)).unwrap();
        assert_eq!(v.q_inner, 4); // floor(sqrt(16))
        assert_eq!(v.batch_inner, 4);
        assert_eq!(v.avg_start, v.q_schedule);
    }

    #[test]
    fn fscg_rejects_streaming_oracle() {
        use crate::problem::ComponentOracle;
        struct Streaming;
        impl ComponentOracle for Streaming {
            fn n_components(&self) -> Option<usize> {
                None
            }
            fn dim(&self) -> usize {
                2
            }
            fn grad_component(&self, x: &[f64], id: u64, out: &mut [f64]) {
                let shift = (id % 7) as f64 * 1e-3;
                out[0] = x[0] + shift;
                out[1] = x[1];
            }
            fn value_component(&self, x: &[f64], id: u64) -> f64 {
                let shift = (id % 7) as f64 * 1e-3;
                0.5 * ((x[0] + shift) * (x[0] + shift) + x[1] * x[1])
            }
        }
        let prob = ProblemInstance::new(
            crate::lmo::FeasibleSet::l2_ball(1.0, 2),
            Box::new(Streaming),
            Box::new(Streaming),
        )
        .unwrap();
        assert!(matches!(
            validate(&prob, &cfg(Method::IrFscg, 0.5)),
            Err(Error::MissingFiniteSum(_))
        ));
        assert!(validate(&prob, &cfg(Method::IrScg, 0.25)).is_ok());
    }

    #[test]
    fn validate_is_idempotent() {
        let prob = problem();
        let mut c = cfg(Method::IrFscg, 0.5);
        c.p = None; // let the default resolve
        let v1 = validate(&prob, &c).unwrap();
        let v2 = validate(&prob, &v1.normalized).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn nonconvex_preset_defaults() {
        let prob = problem();
        let mut c = cfg(Method::IrScg, 0.25);
        c.preset = SchedulePreset::Nonconvex;
        c.p = None;
        let v = validate(&prob, &c).unwrap();
        assert!((v.p - 2.0 / 7.0).abs() < 1e-15);
        assert!((v.omega.unwrap() - 6.0 / 7.0).abs() < 1e-15);

        let mut c = cfg(Method::IrFscg, 0.5);
        c.preset = SchedulePreset::Nonconvex;
        c.p = None;
        let v = validate(&prob, &c).unwrap();
        assert_eq!(v.p, 0.5);
        assert_eq!(v.omega.unwrap(), 0.75);
    }

    #[test]
    fn nonconvex_requires_p_le_omega() {
        let prob = problem();
        let mut c = cfg(Method::IrScg, 0.9);
        c.preset = SchedulePreset::Nonconvex;
        c.omega = Some(0.5);
        assert!(matches!(
            validate(&prob, &c),
            Err(Error::InvalidExponent { .. })
        ));
    }
}
