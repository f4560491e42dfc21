//! Constrained least-squares bilevel instances.
//!
//! Inner level: mean squared training residual over an l1 ball. Outer level:
//! mean squared residual on a held-out validation block. Component `i` has
//! value `(a_i^T x - b_i)^2` and gradient `2 a_i (a_i^T x - b_i)`, so the
//! mean over components reproduces the `(1/n) ||Ax - b||^2` objective with no
//! extra factor of one half.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lmo::FeasibleSet;
use crate::problem::{ComponentOracle, ProblemInstance, ReferenceOptima};
use crate::vecmath::{norm1, DenseMatrix};

/// Raw generated data; convert with [`RegressionData::to_problem`].
#[derive(Debug, Clone)]
pub struct RegressionData {
    pub a_tr: DenseMatrix,
    pub b_tr: Vec<f64>,
    pub a_val: DenseMatrix,
    pub b_val: Vec<f64>,
    pub delta: f64,
    /// Planted coefficient vector (interior of the l1 ball).
    pub planted: Vec<f64>,
    pub noise: f64,
}

impl RegressionData {
    /// Gaussian design, labels from a planted vector with `||planted||_1 =
    /// 0.8 * delta`, optional additive Gaussian label noise. With `noise = 0`
    /// the inner optimum is interior and its value is exactly zero.
    pub fn generate(seed: u64, n: usize, d: usize, n_val: usize, delta: f64, noise: f64) -> Self {
        assert!(n >= 1 && d >= 1 && n_val >= 1 && delta > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut planted = vec![0.0; d];
        let k = (d / 5).max(1);
        for _ in 0..k {
            let j = rng.random_range(0..d);
            planted[j] = super::gauss(&mut rng);
        }
        let n1 = norm1(&planted);
        if n1 > 0.0 {
            let scale = 0.8 * delta / n1;
            for v in planted.iter_mut() {
                *v *= scale;
            }
        } else {
            planted[0] = 0.8 * delta;
        }

        let mut gen_block = |rows: usize| {
            let mut a = DenseMatrix::zeros(rows, d);
            let mut b = vec![0.0; rows];
            for i in 0..rows {
                for j in 0..d {
                    a.set(i, j, super::gauss(&mut rng));
                }
                let clean: f64 = a.row(i).iter().zip(&planted).map(|(x, w)| x * w).sum();
                b[i] = clean + noise * super::gauss(&mut rng);
            }
            (a, b)
        };
        let (a_tr, b_tr) = gen_block(n);
        let (a_val, b_val) = gen_block(n_val);

        Self {
            a_tr,
            b_tr,
            a_val,
            b_val,
            delta,
            planted,
            noise,
        }
    }

    pub fn from_matrices(
        a_tr: DenseMatrix,
        b_tr: Vec<f64>,
        a_val: DenseMatrix,
        b_val: Vec<f64>,
        delta: f64,
    ) -> Self {
        assert_eq!(a_tr.rows(), b_tr.len());
        assert_eq!(a_val.rows(), b_val.len());
        assert_eq!(a_tr.cols(), a_val.cols());
        Self {
            a_tr,
            b_tr,
            a_val,
            b_val,
            delta,
            planted: vec![],
            noise: f64::NAN,
        }
    }

    pub fn to_problem(&self) -> ProblemInstance {
        let d = self.a_tr.cols();
        let outer = SquaredResiduals {
            a: self.a_val.clone(),
            b: self.b_val.clone(),
        };
        let inner = SquaredResiduals {
            a: self.a_tr.clone(),
            b: self.b_tr.clone(),
        };
        let mut problem = ProblemInstance::new(
            FeasibleSet::l1_ball(self.delta, d),
            Box::new(outer),
            Box::new(inner),
        )
        .expect("consistent by construction");
        if self.noise == 0.0 {
            // interior planted optimum: the inner minimum value is zero
            problem.set_refs(ReferenceOptima::inner_only(0.0, 1e-12));
        }
        problem
    }
}

/// Finite-sum oracle with components `(a_i^T x - b_i)^2`.
struct SquaredResiduals {
    a: DenseMatrix,
    b: Vec<f64>,
}

impl ComponentOracle for SquaredResiduals {
    fn n_components(&self) -> Option<usize> {
        Some(self.a.rows())
    }

    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn grad_component(&self, x: &[f64], id: u64, out: &mut [f64]) {
        let row = self.a.row(id as usize);
        let r: f64 = row.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>() - self.b[id as usize];
        for (o, a) in out.iter_mut().zip(row) {
            *o = 2.0 * a * r;
        }
    }

    fn value_component(&self, x: &[f64], id: u64) -> f64 {
        let row = self.a.row(id as usize);
        let r: f64 = row.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>() - self.b[id as usize];
        r * r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_planted_vector_is_interior_zero() {
        let data = RegressionData::generate(7, 20, 6, 10, 2.0, 0.0);
        assert!(norm1(&data.planted) <= 0.8 * 2.0 + 1e-12);
        let problem = data.to_problem();
        assert!((problem.inner().full_value(&data.planted)).abs() < 1e-20);
        assert_eq!(problem.refs().unwrap().g_opt, 0.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = RegressionData::generate(3, 5, 4, 5, 1.0, 0.1);
        let b = RegressionData::generate(3, 5, 4, 5, 1.0, 0.1);
        assert_eq!(a.a_tr, b.a_tr);
        assert_eq!(a.b_val, b.b_val);
    }

    #[test]
    fn full_grad_is_mean_of_components() {
        let data = RegressionData::generate(5, 8, 5, 8, 1.0, 0.05);
        let problem = data.to_problem();
        let x = vec![0.01; 5];
        let mut full = vec![0.0; 5];
        problem.inner().full_grad(&x, &mut full);
        let mut acc = vec![0.0; 5];
        let mut buf = vec![0.0; 5];
        for id in 0..8 {
            problem.inner().grad_component(&x, id, &mut buf);
            for i in 0..5 {
                acc[i] += buf[i] / 8.0;
            }
        }
        for i in 0..5 {
            assert!((full[i] - acc[i]).abs() <= 1e-12 * full[i].abs().max(1.0));
        }
    }
}
