//! Per-checkpoint solver metrics.

/// One trace row. Gap fields stay `None` when no reference value exists or,
/// for the averaged-iterate columns, before the averaged iterate is defined.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    /// Cumulative component-gradient evaluations across both levels.
    pub oracle_calls: u64,
    pub wall_ms: f64,
    pub f_gap_x: Option<f64>,
    pub g_gap_x: Option<f64>,
    pub f_gap_z: Option<f64>,
    pub g_gap_z: Option<f64>,
    pub sigma_t: f64,
    pub alpha_t: f64,
    /// Gradient-estimate error norms (outer, inner); diagnostic, finite-sum
    /// runs only when enabled.
    pub est_err: Option<(f64, f64)>,
}
