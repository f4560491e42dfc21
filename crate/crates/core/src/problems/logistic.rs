//! Minimal-norm logistic regression bilevel instances.
//!
//! Inner level: mean logistic loss over an l1 ball. Outer level: the
//! deterministic `0.5 ||x||^2`, exposed as a single-component oracle so the
//! only sampling noise comes from the inner problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lmo::FeasibleSet;
use crate::problem::{ComponentOracle, ProblemInstance};
use crate::vecmath::{norm2, DenseMatrix};

/// `psi(u, b) = ln(1 + exp(-b u))`, evaluated without overflow for large |u|.
pub fn logistic_loss(u: f64, b: f64) -> f64 {
    let z = b * u;
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `d psi / d u = -b / (1 + exp(b u))`.
pub fn logistic_loss_deriv(u: f64, b: f64) -> f64 {
    let z = b * u;
    if z > 0.0 {
        -b * (-z).exp() / (1.0 + (-z).exp())
    } else {
        -b / (1.0 + z.exp())
    }
}

#[derive(Debug, Clone)]
pub struct LogisticData {
    pub a: DenseMatrix,
    /// Labels in {-1, +1}.
    pub b: Vec<f64>,
    pub beta: f64,
}

impl LogisticData {
    /// Gaussian features, labels from a planted linear rule with a 5% flip
    /// rate.
    pub fn generate(seed: u64, n: usize, d: usize, beta: f64) -> Self {
        assert!(n >= 1 && d >= 1 && beta > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = vec![0.0; d];
        for wi in w.iter_mut() {
            *wi = super::gauss(&mut rng);
        }
        let wn = norm2(&w);
        for wi in w.iter_mut() {
            *wi /= wn;
        }
        let mut a = DenseMatrix::zeros(n, d);
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..d {
                a.set(i, j, super::gauss(&mut rng));
            }
            let score: f64 = a.row(i).iter().zip(&w).map(|(x, wi)| x * wi).sum();
            let mut label = if score >= 0.0 { 1.0 } else { -1.0 };
            if rng.random::<f64>() < 0.05 {
                label = -label;
            }
            b[i] = label;
        }
        Self { a, b, beta }
    }

    pub fn from_matrices(a: DenseMatrix, b: Vec<f64>, beta: f64) -> Self {
        assert_eq!(a.rows(), b.len());
        assert!(b.iter().all(|&l| l == 1.0 || l == -1.0), "labels must be +-1");
        Self { a, b, beta }
    }

    pub fn to_problem(&self) -> ProblemInstance {
        let d = self.a.cols();
        ProblemInstance::new(
            FeasibleSet::l1_ball(self.beta, d),
            Box::new(HalfSquaredNorm { dim: d }),
            Box::new(LogisticLoss {
                a: self.a.clone(),
                b: self.b.clone(),
            }),
        )
        .expect("consistent by construction")
    }
}

/// Deterministic outer objective `0.5 ||x||^2` as a one-component oracle.
struct HalfSquaredNorm {
    dim: usize,
}

impl ComponentOracle for HalfSquaredNorm {
    fn n_components(&self) -> Option<usize> {
        Some(1)
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn grad_component(&self, x: &[f64], _id: u64, out: &mut [f64]) {
        out.copy_from_slice(x);
    }
    fn value_component(&self, x: &[f64], _id: u64) -> f64 {
        0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }
}

struct LogisticLoss {
    a: DenseMatrix,
    b: Vec<f64>,
}

impl ComponentOracle for LogisticLoss {
    fn n_components(&self) -> Option<usize> {
        Some(self.a.rows())
    }
    fn dim(&self) -> usize {
        self.a.cols()
    }
    fn grad_component(&self, x: &[f64], id: u64, out: &mut [f64]) {
        let row = self.a.row(id as usize);
        let u: f64 = row.iter().zip(x).map(|(a, xi)| a * xi).sum();
        let s = logistic_loss_deriv(u, self.b[id as usize]);
        for (o, a) in out.iter_mut().zip(row) {
            *o = s * a;
        }
    }
    fn value_component(&self, x: &[f64], id: u64) -> f64 {
        let row = self.a.row(id as usize);
        let u: f64 = row.iter().zip(x).map(|(a, xi)| a * xi).sum();
        logistic_loss(u, self.b[id as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_at_zero_is_ln_two() {
        assert!((logistic_loss(0.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        assert!((logistic_loss(0.0, -1.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn deriv_at_zero_is_minus_half() {
        assert!((logistic_loss_deriv(0.0, 1.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn large_margin_is_stable() {
        let v = logistic_loss(50.0, 1.0);
        assert!(v.is_finite() && v > 0.0);
        assert!((v - (-50f64).exp()).abs() < 1e-24);
        assert!(logistic_loss(-800.0, 1.0).is_finite());
        assert!(logistic_loss_deriv(-800.0, 1.0).is_finite());
    }

    #[test]
    fn outer_oracle_is_deterministic_norm() {
        let data = LogisticData::generate(1, 10, 4, 20.0);
        let problem = data.to_problem();
        assert_eq!(problem.n_outer(), Some(1));
        let x = vec![1.0, -2.0, 0.5, 0.0];
        assert!((problem.outer().full_value(&x) - 0.5 * (1.0 + 4.0 + 0.25)).abs() < 1e-15);
    }
}
