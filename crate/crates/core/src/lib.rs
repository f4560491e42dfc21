//! Projection-free solvers for stochastic simple bilevel optimization.
//!
//! The problem: minimize an outer objective `F` over the set of minimizers of
//! an inner objective `G` on a compact convex set, where both objectives are
//! expectations accessed through sampled component gradients. Instead of
//! projecting onto (or even representing) the inner solution set, the solvers
//! here fold the two levels into the blend `sigma_t F + G` with a vanishing
//! weight `sigma_t` and take conditional-gradient steps, so the only
//! constraint access is a linear minimization oracle over the base set.
//!
//! Two methods are provided, differing in how they estimate gradients:
//!
//! * [`config::Method::IrScg`] draws a single fresh sample per level per
//!   iteration and reduces variance with a recursive momentum correction;
//! * [`config::Method::IrFscg`] targets finite sums, mixing periodic exact
//!   full gradients with shared-sample mini-batch differences.
//!
//! Besides the solvers the crate carries the exact linear-minimization
//! oracles ([`lmo`]), the stepsize/regularization schedules as pure functions
//! of the iteration index ([`schedules`]), benchmark problem generators with
//! planted optima ([`problems`]), deterministic reference solves, and rate
//! diagnostics ([`diagnostics`]).

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod lmo;
pub mod problem;
pub mod problems;
pub mod schedules;
pub mod solvers;
pub mod trace;
pub mod vecmath;

pub use config::{validate, Budget, Method, SchedulePreset, SolverConfig, ValidatedConfig};
pub use error::{Error, Result};
pub use lmo::FeasibleSet;
pub use problem::{ComponentOracle, ProblemInstance, ReferenceOptima};
pub use solvers::{reference_bilevel, reference_inner, Runner};
pub use trace::TraceRecord;
