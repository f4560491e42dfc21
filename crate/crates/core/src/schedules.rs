//! Stepsize, regularization, and averaging-weight sequences.
//!
//! Every sequence is a pure function of the iteration index and its fixed
//! parameters, never of the total budget: the solvers stay anytime and
//! resumable by construction. `log` means natural log throughout.

use crate::error::{Error, Result};

/// `alpha_t = 2 / (t + 2)`.
pub fn alpha_convex(t: usize) -> f64 {
    2.0 / (t as f64 + 2.0)
}

/// Constant warm-up stepsize `log(q) / q` used while a finite-sum run
/// accumulates its first full-gradient window. Needs `q >= 2`, otherwise the
/// stepsize degenerates to zero.
pub fn alpha_warm(q: usize) -> Result<f64> {
    if q < 2 {
        return Err(Error::PeriodTooSmall(q));
    }
    Ok((q as f64).ln() / q as f64)
}

/// `alpha_t = (t + 1)^{-omega}`.
pub fn alpha_nonconvex(t: usize, omega: f64) -> f64 {
    (t as f64 + 1.0).powf(-omega)
}

/// `sigma_t = varsigma * (t + 1)^{-p}`.
pub fn sigma_one_sample(t: usize, varsigma: f64, p: f64) -> f64 {
    varsigma * (t as f64 + 1.0).powf(-p)
}

/// `sigma_t = varsigma * (max(t, q) + 1)^{-p}`: constant plateau through
/// `t = q`, then the usual power decay.
pub fn sigma_finite_sum(t: usize, q: usize, varsigma: f64, p: f64) -> f64 {
    varsigma * (t.max(q) as f64 + 1.0).powf(-p)
}

/// `sigma_t = varsigma * (max(t, q + 1) + 1)^{-p}`: plateau extended through
/// `t = q + 1`, matching the warm phase of the nonconvex finite-sum preset.
pub fn sigma_nonconvex_fs(t: usize, q: usize, varsigma: f64, p: f64) -> f64 {
    varsigma * (t.max(q + 1) as f64 + 1.0).powf(-p)
}

/// Averaging weights for the nonconvex finite-sum preset. During the warm
/// phase the weight is a geometric taper of the initial regularization level
/// `sigma_0 = sigma_nonconvex_fs(0)`; afterwards it equals `sigma_t`.
pub fn beta_nonconvex(t: usize, q: usize, omega: f64, varsigma: f64, p: f64) -> Result<f64> {
    if q < 2 {
        return Err(Error::PeriodTooSmall(q));
    }
    if t > q {
        return Ok(sigma_nonconvex_fs(t, q, varsigma, p));
    }
    let sigma0 = sigma_nonconvex_fs(0, q, varsigma, p);
    let qp1 = q as f64 + 1.0;
    let rate = qp1.ln() / qp1;
    Ok(sigma0 * qp1.powf(omega) * rate * (1.0 - rate).powi((q - t) as i32))
}

/// Resolved stepsize sequence for a configured run.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSchedule {
    /// `2/(t+2)` from the start.
    Convex,
    /// `log(q)/q` while `t < q`, then `2/(t+2)`; with `variant_t_plus_1` the
    /// tail is `2/(t+1)` instead. `q < 2` skips the warm phase entirely.
    WarmThenConvex { q: usize, variant_t_plus_1: bool },
    /// `(t+1)^{-omega}` from the start.
    Nonconvex { omega: f64 },
    /// `log(q+1)/(q+1)` while `t <= q`, then `(t+1)^{-omega}`.
    WarmThenNonconvex { q: usize, omega: f64 },
}

impl AlphaSchedule {
    pub fn eval(&self, t: usize) -> f64 {
        match self {
            AlphaSchedule::Convex => alpha_convex(t),
            AlphaSchedule::WarmThenConvex {
                q,
                variant_t_plus_1,
            } => {
                if *q >= 2 && t < *q {
                    alpha_warm(*q).expect("q >= 2 checked")
                } else if *variant_t_plus_1 {
                    2.0 / (t as f64 + 1.0)
                } else {
                    alpha_convex(t)
                }
            }
            AlphaSchedule::Nonconvex { omega } => alpha_nonconvex(t, *omega),
            AlphaSchedule::WarmThenNonconvex { q, omega } => {
                if t <= *q {
                    let qp1 = *q as f64 + 1.0;
                    qp1.ln() / qp1
                } else {
                    alpha_nonconvex(t, *omega)
                }
            }
        }
    }
}

/// Resolved regularization sequence for a configured run.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSchedule {
    OneSample { varsigma: f64, p: f64 },
    FiniteSum { varsigma: f64, p: f64, q: usize },
    NonconvexFs { varsigma: f64, p: f64, q: usize },
}

impl SigmaSchedule {
    pub fn eval(&self, t: usize) -> f64 {
        match self {
            SigmaSchedule::OneSample { varsigma, p } => sigma_one_sample(t, *varsigma, *p),
            SigmaSchedule::FiniteSum { varsigma, p, q } => sigma_finite_sum(t, *q, *varsigma, *p),
            SigmaSchedule::NonconvexFs { varsigma, p, q } => {
                sigma_nonconvex_fs(t, *q, *varsigma, *p)
            }
        }
    }

    pub fn p(&self) -> f64 {
        match self {
            SigmaSchedule::OneSample { p, .. }
            | SigmaSchedule::FiniteSum { p, .. }
            | SigmaSchedule::NonconvexFs { p, .. } => *p,
        }
    }
}
