//! Problem definitions and the stochastic oracle contract.

use crate::error::{Error, Result};
use crate::lmo::FeasibleSet;
use crate::vecmath;

/// Access to one stochastic objective `E[h(x, sample)]`.
///
/// A finite-sum oracle exposes `n_components` component functions indexed by
/// `0..n`, with the objective being their arithmetic mean; a streaming oracle
/// (`n_components() == None`) interprets the id as a raw 64-bit draw from the
/// caller's generator. Either way `grad_component` must be deterministic in
/// `(x, id)` so traces replay exactly.
pub trait ComponentOracle: Send + Sync {
    /// Number of components, or `None` for a pure streaming oracle.
    fn n_components(&self) -> Option<usize>;

    fn dim(&self) -> usize;

    /// Gradient of component `id` at `x`, written into `out`.
    fn grad_component(&self, x: &[f64], id: u64, out: &mut [f64]);

    /// Value of component `id` at `x`.
    fn value_component(&self, x: &[f64], id: u64) -> f64;

    /// Exact gradient: mean of all component gradients. Finite-sum only.
    fn full_grad(&self, x: &[f64], out: &mut [f64]) {
        let n = self
            .n_components()
            .expect("full_grad requires a finite-sum oracle");
        out.fill(0.0);
        let mut buf = vec![0.0; x.len()];
        for id in 0..n as u64 {
            self.grad_component(x, id, &mut buf);
            vecmath::axpy(1.0, &buf, out);
        }
        vecmath::scale(1.0 / n as f64, out);
    }

    /// Exact value: mean of all component values. Finite-sum only.
    fn full_value(&self, x: &[f64]) -> f64 {
        let n = self
            .n_components()
            .expect("full_value requires a finite-sum oracle");
        let mut s = 0.0;
        for id in 0..n as u64 {
            s += self.value_component(x, id);
        }
        s / n as f64
    }

    fn is_finite_sum(&self) -> bool {
        self.n_components().is_some()
    }
}

/// Certified or estimated optimal values used for gap reporting.
///
/// `g_opt` is a true lower bound on the inner objective, certified to within
/// `g_tol`. The bilevel value `f_opt` carries no certificate; it is an
/// estimate with honest tolerance `f_tol`, and gaps against it may come out
/// negative by up to that amount.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptima {
    pub g_opt: f64,
    pub g_tol: f64,
    pub f_opt: Option<f64>,
    pub f_tol: Option<f64>,
}

impl ReferenceOptima {
    pub fn inner_only(g_opt: f64, g_tol: f64) -> Self {
        assert!(g_tol > 0.0);
        Self {
            g_opt,
            g_tol,
            f_opt: None,
            f_tol: None,
        }
    }

    pub fn with_bilevel(mut self, f_opt: f64, f_tol: f64) -> Self {
        assert!(f_tol > 0.0);
        self.f_opt = Some(f_opt);
        self.f_tol = Some(f_tol);
        self
    }
}

/// Optional smoothness constants, carried for diagnostics only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothness {
    pub l_f: f64,
    pub l_g: f64,
}

/// A simple bilevel problem: minimize the outer objective over the minimizers
/// of the inner objective on the feasible set.
pub struct ProblemInstance {
    dim: usize,
    feasible_set: FeasibleSet,
    outer: Box<dyn ComponentOracle>,
    inner: Box<dyn ComponentOracle>,
    refs: Option<ReferenceOptima>,
    smoothness: Option<Smoothness>,
}

impl ProblemInstance {
    pub fn new(
        feasible_set: FeasibleSet,
        outer: Box<dyn ComponentOracle>,
        inner: Box<dyn ComponentOracle>,
    ) -> Result<Self> {
        let dim = feasible_set.dim();
        if dim == 0 {
            return Err(Error::InvalidConfig(vec!["dimension must be >= 1".into()]));
        }
        for (oracle, name) in [(&outer, "outer"), (&inner, "inner")] {
            if oracle.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: oracle.dim(),
                    context: match name {
                        "outer" => "outer oracle",
                        _ => "inner oracle",
                    },
                });
            }
            if let Some(n) = oracle.n_components() {
                if n == 0 {
                    return Err(Error::InvalidConfig(vec![format!(
                        "{name} oracle has zero components"
                    )]));
                }
            }
        }
        Ok(Self {
            dim,
            feasible_set,
            outer,
            inner,
            refs: None,
            smoothness: None,
        })
    }

    pub fn with_refs(mut self, refs: ReferenceOptima) -> Self {
        self.refs = Some(refs);
        self
    }

    pub fn set_refs(&mut self, refs: ReferenceOptima) {
        self.refs = Some(refs);
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = Some(s);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feasible_set(&self) -> &FeasibleSet {
        &self.feasible_set
    }

    pub fn outer(&self) -> &dyn ComponentOracle {
        self.outer.as_ref()
    }

    pub fn inner(&self) -> &dyn ComponentOracle {
        self.inner.as_ref()
    }

    pub fn refs(&self) -> Option<&ReferenceOptima> {
        self.refs.as_ref()
    }

    pub fn smoothness(&self) -> Option<Smoothness> {
        self.smoothness
    }

    pub fn n_outer(&self) -> Option<usize> {
        self.outer.n_components()
    }

    pub fn n_inner(&self) -> Option<usize> {
        self.inner.n_components()
    }

    /// True when both levels expose exact full gradients.
    pub fn is_finite_sum(&self) -> bool {
        self.outer.is_finite_sum() && self.inner.is_finite_sum()
    }
}

impl std::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("dim", &self.dim)
            .field("feasible_set", &self.feasible_set)
            .field("n_outer", &self.outer.n_components())
            .field("n_inner", &self.inner.n_components())
            .field("refs", &self.refs)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quad {
        dim: usize,
        centers: Vec<Vec<f64>>,
    }

    impl ComponentOracle for Quad {
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
    fn full_grad_is_mean_of_components() {
        let oracle = Quad {
            dim: 2,
            centers: vec![vec![1.0, 0.0], vec![3.0, 2.0]],
        };
        let mut g = vec![0.0; 2];
        oracle.full_grad(&[0.0, 0.0], &mut g);
        assert!((g[0] + 2.0).abs() < 1e-15);
        assert!((g[1] + 1.0).abs() < 1e-15);
        assert!((oracle.full_value(&[1.0, 0.0]) - 0.5 * (0.0 + 8.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn instance_rejects_dim_mismatch() {
        let outer = Box::new(Quad {
            dim: 3,
            centers: vec![vec![0.0; 3]],
        });
        let inner = Box::new(Quad {
            dim: 2,
            centers: vec![vec![0.0; 2]],
        });
        let set = FeasibleSet::l2_ball(1.0, 3);
        assert!(matches!(
            ProblemInstance::new(set, outer, inner),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
