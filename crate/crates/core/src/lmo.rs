//! Feasible sets with exact linear minimization oracles.
//!
//! The solvers touch the constraint set exclusively through [`lmo`]: given a
//! direction `g`, return a point of the set minimizing `g^T v`. Every
//! supported set admits a closed-form answer, so no projection or general
//! conic solve ever happens. Tie-breaking is fixed (lowest index wins) so
//! that runs are replayable.

use rand::Rng;

use crate::error::{Error, Result};
use crate::vecmath::{norm1, norm2};

/// Declarative constraint-set descriptor.
///
/// `Product` concatenates blocks over contiguous coordinate ranges, in order;
/// it is what matrix-variable problems (per-column norm constraints) lower to.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// `{ x : ||x||_1 <= r }` in the given dimension.
    L1Ball { radius: f64, dim: usize },
    /// `{ x : ||x||_2 <= r }` in the given dimension.
    L2Ball { radius: f64, dim: usize },
    /// `{ x : lower <= x <= upper }` coordinatewise.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{ x : x >= 0, sum(x) = s }` in the given dimension.
    Simplex { scale: f64, dim: usize },
    /// Concatenation of blocks over contiguous coordinate ranges.
    Product(Vec<FeasibleSet>),
}

impl FeasibleSet {
    pub fn l1_ball(radius: f64, dim: usize) -> Self {
        assert!(radius > 0.0 && dim >= 1);
        FeasibleSet::L1Ball { radius, dim }
    }

    pub fn l2_ball(radius: f64, dim: usize) -> Self {
        assert!(radius > 0.0 && dim >= 1);
        FeasibleSet::L2Ball { radius, dim }
    }

    pub fn hyper_box(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(!lower.is_empty());
        assert!(
            lower.iter().zip(&upper).all(|(l, u)| l <= u),
            "box needs lower <= upper"
        );
        FeasibleSet::Box { lower, upper }
    }

    pub fn simplex(scale: f64, dim: usize) -> Self {
        assert!(scale > 0.0 && dim >= 1);
        FeasibleSet::Simplex { scale, dim }
    }

    pub fn product(blocks: Vec<FeasibleSet>) -> Self {
        assert!(!blocks.is_empty());
        FeasibleSet::Product(blocks)
    }

    /// Total ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::L1Ball { dim, .. }
            | FeasibleSet::L2Ball { dim, .. }
            | FeasibleSet::Simplex { dim, .. } => *dim,
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Product(blocks) => blocks.iter().map(|b| b.dim()).sum(),
        }
    }

    /// Euclidean diameter of the set.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::L1Ball { radius, .. } | FeasibleSet::L2Ball { radius, .. } => 2.0 * radius,
            FeasibleSet::Box { lower, upper } => {
                let mut s = 0.0;
                for (l, u) in lower.iter().zip(upper) {
                    s += (u - l) * (u - l);
                }
                s.sqrt()
            }
            FeasibleSet::Simplex { scale, .. } => scale * 2f64.sqrt(),
            FeasibleSet::Product(blocks) => blocks
                .iter()
                .map(|b| b.diameter() * b.diameter())
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Fixed interior point: origin for balls, midpoint for boxes, barycenter
    /// for simplices. Returned by the LMO for an all-zero direction.
    pub fn canonical_point(&self) -> Vec<f64> {
        match self {
            FeasibleSet::L1Ball { dim, .. } | FeasibleSet::L2Ball { dim, .. } => vec![0.0; *dim],
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
            FeasibleSet::Simplex { scale, dim } => vec![scale / *dim as f64; *dim],
            FeasibleSet::Product(blocks) => {
                let mut out = Vec::with_capacity(self.dim());
                for b in blocks {
                    out.extend(b.canonical_point());
                }
                out
            }
        }
    }
}

/// Exact linear minimization: `argmin_{v in set} g^T v`.
///
/// Ties in the vertex selection break to the lowest index; an all-zero
/// direction returns [`FeasibleSet::canonical_point`].
pub fn lmo(set: &FeasibleSet, g: &[f64]) -> Result<Vec<f64>> {
    if g.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: g.len(),
            context: "lmo direction",
        });
    }
    let mut out = vec![0.0; g.len()];
    lmo_into(set, g, &mut out);
    Ok(out)
}

fn lmo_into(set: &FeasibleSet, g: &[f64], out: &mut [f64]) {
    match set {
        FeasibleSet::L1Ball { radius, .. } => {
            // -r * sign(g_k) * e_k at the largest |g_k|
            let mut k = 0;
            let mut best = g[0].abs();
            for (i, gi) in g.iter().enumerate().skip(1) {
                if gi.abs() > best {
                    best = gi.abs();
                    k = i;
                }
            }
            out.fill(0.0);
            if best > 0.0 {
                out[k] = if g[k] > 0.0 { -radius } else { *radius };
            }
        }
        FeasibleSet::L2Ball { radius, .. } => {
            let n = norm2(g);
            if n == 0.0 {
                out.fill(0.0);
            } else {
                for (o, gi) in out.iter_mut().zip(g) {
                    *o = radius * (-gi / n);
                }
            }
        }
        FeasibleSet::Box { lower, upper } => {
            if g.iter().all(|&gi| gi == 0.0) {
                for ((o, l), u) in out.iter_mut().zip(lower).zip(upper) {
                    *o = 0.5 * (l + u);
                }
            } else {
                for (i, gi) in g.iter().enumerate() {
                    out[i] = if *gi < 0.0 { upper[i] } else { lower[i] };
                }
            }
        }
        FeasibleSet::Simplex { scale, dim } => {
            if g.iter().all(|&gi| gi == 0.0) {
                out.fill(scale / *dim as f64);
            } else {
                let mut k = 0;
                let mut best = g[0];
                for (i, gi) in g.iter().enumerate().skip(1) {
                    if *gi < best {
                        best = *gi;
                        k = i;
                    }
                }
                out.fill(0.0);
                out[k] = *scale;
            }
        }
        FeasibleSet::Product(blocks) => {
            let mut off = 0;
            for b in blocks {
                let d = b.dim();
                lmo_into(b, &g[off..off + d], &mut out[off..off + d]);
                off += d;
            }
        }
    }
}

/// Membership test with an absolute tolerance per defining constraint.
pub fn contains(set: &FeasibleSet, x: &[f64], tol: f64) -> bool {
    if x.len() != set.dim() {
        return false;
    }
    match set {
        FeasibleSet::L1Ball { radius, .. } => norm1(x) <= radius + tol,
        FeasibleSet::L2Ball { radius, .. } => norm2(x) <= radius + tol,
        FeasibleSet::Box { lower, upper } => x
            .iter()
            .zip(lower)
            .zip(upper)
            .all(|((xi, l), u)| *xi >= l - tol && *xi <= u + tol),
        FeasibleSet::Simplex { scale, .. } => {
            x.iter().all(|&xi| xi >= -tol) && (x.iter().sum::<f64>() - scale).abs() <= tol
        }
        FeasibleSet::Product(blocks) => {
            let mut off = 0;
            for b in blocks {
                let d = b.dim();
                if !contains(b, &x[off..off + d], tol) {
                    return false;
                }
                off += d;
            }
            true
        }
    }
}

/// Draws a feasible point with full support on the set. Not uniform for every
/// variant, but symmetric enough that empirical means sit near the canonical
/// point.
pub fn random_point<R: Rng>(set: &FeasibleSet, rng: &mut R) -> Vec<f64> {
    match set {
        FeasibleSet::L1Ball { radius, dim } => {
            // signed Dirichlet direction, radial factor u^{1/d}
            let mut v: Vec<f64> = (0..*dim).map(|_| sample_exp(rng)).collect();
            let s: f64 = v.iter().sum();
            let r = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
            for vi in v.iter_mut() {
                *vi = *vi / s * r;
                if rng.random::<bool>() {
                    *vi = -*vi;
                }
            }
            v
        }
        FeasibleSet::L2Ball { radius, dim } => {
            let mut v: Vec<f64> = (0..*dim).map(|_| sample_gauss(rng)).collect();
            let n = norm2(&v);
            let r = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
            if n > 0.0 {
                for vi in v.iter_mut() {
                    *vi = *vi / n * r;
                }
            }
            v
        }
        FeasibleSet::Box { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(l, u)| l + (u - l) * rng.random::<f64>())
            .collect(),
        FeasibleSet::Simplex { scale, dim } => {
            let mut v: Vec<f64> = (0..*dim).map(|_| sample_exp(rng)).collect();
            let s: f64 = v.iter().sum();
            for vi in v.iter_mut() {
                *vi = *vi / s * scale;
            }
            v
        }
        FeasibleSet::Product(blocks) => {
            let mut out = Vec::with_capacity(set.dim());
            for b in blocks {
                out.extend(random_point(b, rng));
            }
            out
        }
    }
}

fn sample_exp<R: Rng>(rng: &mut R) -> f64 {
    // inverse CDF; 1 - u avoids ln(0)
    -(1.0 - rng.random::<f64>()).ln()
}

fn sample_gauss<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn l1_lmo_picks_largest_abs_coordinate() {
        let set = FeasibleSet::l1_ball(1.0, 3);
        let v = lmo(&set, &[0.0, 2.0, -1.0]).unwrap();
        assert_eq!(v, vec![0.0, -1.0, 0.0]);
    }

    #[test]
    fn l2_lmo_is_negative_unit_direction() {
        let set = FeasibleSet::l2_ball(1.0, 2);
        let v = lmo(&set, &[3.0, 4.0]).unwrap();
        assert!((v[0] + 0.6).abs() < 1e-15);
        assert!((v[1] + 0.8).abs() < 1e-15);
    }

    #[test]
    fn box_lmo_zero_coordinate_picks_lower() {
        let set = FeasibleSet::hyper_box(vec![-1.0, -2.0], vec![1.0, 3.0]);
        let v = lmo(&set, &[0.0, -1.0]).unwrap();
        assert_eq!(v, vec![-1.0, 3.0]);
    }

    #[test]
    fn zero_direction_returns_canonical_point() {
        let set = FeasibleSet::hyper_box(vec![0.0, 0.0], vec![1.0, 3.0]);
        assert_eq!(lmo(&set, &[0.0, 0.0]).unwrap(), vec![0.5, 1.5]);
        let simplex = FeasibleSet::simplex(1.0, 4);
        assert_eq!(lmo(&simplex, &[0.0; 4]).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn simplex_ties_break_low() {
        let set = FeasibleSet::simplex(2.0, 3);
        let v = lmo(&set, &[1.0, 1.0, 5.0]).unwrap();
        assert_eq!(v, vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn contains_examples() {
        let l1 = FeasibleSet::l1_ball(1.0, 2);
        assert!(contains(&l1, &[0.5, -0.5], 0.0));
        assert!(!contains(&l1, &[0.6, -0.5], 1e-9));
        let s = FeasibleSet::simplex(1.0, 3);
        assert!(contains(&s, &[0.5, 0.5, 0.0], 0.0));
    }

    #[test]
    fn diameters() {
        assert_eq!(FeasibleSet::l1_ball(1.0, 5).diameter(), 2.0);
        let b = FeasibleSet::hyper_box(vec![0.0; 4], vec![1.0; 4]);
        assert_eq!(b.diameter(), 2.0);
        let p = FeasibleSet::product(vec![
            FeasibleSet::l2_ball(1.0, 2),
            FeasibleSet::l1_ball(3.0, 2),
        ]);
        assert!((p.diameter() - 40f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lmo_dimension_mismatch() {
        let set = FeasibleSet::l1_ball(1.0, 3);
        assert!(matches!(
            lmo(&set, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_point_deterministic_under_seed() {
        let set = FeasibleSet::l2_ball(1.0, 4);
        let a = random_point(&set, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_point(&set, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(contains(&set, &a, 1e-12));
    }

    #[test]
    fn product_lmo_concatenates_blocks() {
        let set = FeasibleSet::product(vec![
            FeasibleSet::l1_ball(1.0, 2),
            FeasibleSet::simplex(1.0, 2),
        ]);
        let v = lmo(&set, &[2.0, -1.0, 0.5, 0.1]).unwrap();
        assert_eq!(v, vec![-1.0, 0.0, 0.0, 1.0]);
    }
}
