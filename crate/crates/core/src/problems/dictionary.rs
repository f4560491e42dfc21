//! Incremental dictionary-learning bilevel instances.
//!
//! The variable is the pair (new dictionary `D` in R^{m x q_dict}, new
//! coefficients `X` in R^{q_dict x n_new}) flattened column-major into one
//! vector: first the `q_dict` dictionary columns (each constrained to the
//! unit l2 ball), then the `n_new` coefficient columns (each constrained to
//! an l1 ball of radius `delta`).
//!
//! Inner level: mean of `0.5 ||a_i - D xhat_i||^2` over the old data, where
//! the old coefficient vectors are zero-padded to `q_dict` entries; it
//! depends on the dictionary block only, and is convex. Outer level: mean of
//! `0.5 ||a'_i - D x_i||^2` over the new data, bilinear in (D, X), hence
//! nonconvex as a joint function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lmo::FeasibleSet;
use crate::problem::{ComponentOracle, ProblemInstance, ReferenceOptima};
use crate::vecmath::{norm1, norm2, DenseMatrix};

#[derive(Debug, Clone)]
pub struct DictionaryData {
    /// Old data, m x n (column i is sample a_i).
    pub a_old: DenseMatrix,
    /// New data, m x n_new.
    pub a_new: DenseMatrix,
    /// Fixed old coefficients, p_old x n; implicitly zero-padded to q_dict.
    pub x_hat: DenseMatrix,
    pub m: usize,
    pub p_old: usize,
    pub q_dict: usize,
    pub n: usize,
    pub n_new: usize,
    pub delta: f64,
}

impl DictionaryData {
    /// Plants a ground-truth dictionary with column norms 0.9 and sparse
    /// codes with l1 mass `0.8 * delta`, then synthesizes both data blocks
    /// exactly from them: the inner optimum value is zero and attained in
    /// the interior of the column constraints.
    pub fn generate(
        seed: u64,
        m: usize,
        p_old: usize,
        q_dict: usize,
        n: usize,
        n_new: usize,
        delta: f64,
    ) -> Self {
        assert!(q_dict > p_old, "q_dict must exceed p_old");
        assert!(m >= 1 && p_old >= 1 && n >= 1 && n_new >= 1 && delta > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut dict_col = |col: &mut [f64]| {
            for v in col.iter_mut() {
                *v = super::gauss(&mut rng);
            }
            let nn = norm2(col);
            for v in col.iter_mut() {
                *v *= 0.9 / nn;
            }
        };
        // ground-truth atoms: old ones first, then the enrichment columns
        let mut d_true = DenseMatrix::zeros(m, q_dict);
        let mut col = vec![0.0; m];
        for j in 0..q_dict {
            dict_col(&mut col);
            for i in 0..m {
                d_true.set(i, j, col[i]);
            }
        }

        let sparse_col = |rng: &mut ChaCha8Rng, len: usize, delta: f64| -> Vec<f64> {
            let mut c = vec![0.0; len];
            let nz = (len / 4).clamp(1, 3);
            for _ in 0..nz {
                let j = rng.random_range(0..len);
                c[j] = super::gauss(rng);
            }
            let l1 = norm1(&c);
            if l1 > 0.0 {
                let s = 0.8 * delta / l1;
                for v in c.iter_mut() {
                    *v *= s;
                }
            } else {
                c[0] = 0.8 * delta;
            }
            c
        };

        let mut x_hat = DenseMatrix::zeros(p_old, n);
        let mut a_old = DenseMatrix::zeros(m, n);
        for i in 0..n {
            let code = sparse_col(&mut rng, p_old, delta);
            for j in 0..p_old {
                x_hat.set(j, i, code[j]);
            }
            for r in 0..m {
                let mut v = 0.0;
                for j in 0..p_old {
                    v += d_true.get(r, j) * code[j];
                }
                a_old.set(r, i, v);
            }
        }

        let mut a_new = DenseMatrix::zeros(m, n_new);
        for i in 0..n_new {
            let code = sparse_col(&mut rng, q_dict, delta);
            for r in 0..m {
                let mut v = 0.0;
                for j in 0..q_dict {
                    v += d_true.get(r, j) * code[j];
                }
                a_new.set(r, i, v);
            }
        }

        Self {
            a_old,
            a_new,
            x_hat,
            m,
            p_old,
            q_dict,
            n,
            n_new,
            delta,
        }
    }

    pub fn dim(&self) -> usize {
        self.m * self.q_dict + self.q_dict * self.n_new
    }

    pub fn feasible_set(&self) -> FeasibleSet {
        let mut blocks = Vec::with_capacity(self.q_dict + self.n_new);
        for _ in 0..self.q_dict {
            blocks.push(FeasibleSet::l2_ball(1.0, self.m));
        }
        for _ in 0..self.n_new {
            blocks.push(FeasibleSet::l1_ball(self.delta, self.q_dict));
        }
        FeasibleSet::product(blocks)
    }

    pub fn to_problem(&self) -> ProblemInstance {
        let outer = OuterFit {
            data: self.clone(),
        };
        let inner = InnerFit {
            data: self.clone(),
        };
        ProblemInstance::new(self.feasible_set(), Box::new(outer), Box::new(inner))
            .expect("consistent by construction")
            // planted: a_old = D_true * x_hat exactly, and D_true is feasible
            .with_refs(ReferenceOptima::inner_only(0.0, 1e-12))
    }
}

fn dict_block(x: &[f64], m: usize, j: usize) -> &[f64] {
    &x[j * m..(j + 1) * m]
}

fn coeff_block(x: &[f64], m: usize, q_dict: usize, i: usize) -> &[f64] {
    let off = m * q_dict + i * q_dict;
    &x[off..off + q_dict]
}

/// Residual `a_col - D c` for a coefficient vector `c` over the first
/// `active` dictionary columns.
fn residual(x: &[f64], m: usize, a_col: impl Fn(usize) -> f64, c: &[f64], active: usize) -> Vec<f64> {
    let mut r: Vec<f64> = (0..m).map(&a_col).collect();
    for (j, cj) in c.iter().enumerate().take(active) {
        if *cj != 0.0 {
            let dj = dict_block(x, m, j);
            for (ri, dji) in r.iter_mut().zip(dj) {
                *ri -= cj * dji;
            }
        }
    }
    r
}

/// Inner oracle: component i is `0.5 ||a_i - D xhat_i||^2`; the coefficient
/// block of its gradient is identically zero.
struct InnerFit {
    data: DictionaryData,
}

impl ComponentOracle for InnerFit {
    fn n_components(&self) -> Option<usize> {
        Some(self.data.n)
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn grad_component(&self, x: &[f64], id: u64, out: &mut [f64]) {
        let d = &self.data;
        let i = id as usize;
        let code: Vec<f64> = (0..d.p_old).map(|j| d.x_hat.get(j, i)).collect();
        let r = residual(x, d.m, |row| d.a_old.get(row, i), &code, d.p_old);
        out.fill(0.0);
        // d/dD of 0.5||r||^2 is -r code^T; zero-padded columns stay zero
        for (j, cj) in code.iter().enumerate() {
            if *cj != 0.0 {
                let block = &mut out[j * d.m..(j + 1) * d.m];
                for (o, ri) in block.iter_mut().zip(&r) {
                    *o = -cj * ri;
                }
            }
        }
    }

    fn value_component(&self, x: &[f64], id: u64) -> f64 {
        let d = &self.data;
        let i = id as usize;
        let code: Vec<f64> = (0..d.p_old).map(|j| d.x_hat.get(j, i)).collect();
        let r = residual(x, d.m, |row| d.a_old.get(row, i), &code, d.p_old);
        0.5 * r.iter().map(|v| v * v).sum::<f64>()
    }
}

/// Outer oracle: component i is `0.5 ||a'_i - D x_i||^2` with x_i the i-th
/// coefficient column of the variable itself; its gradient touches the whole
/// dictionary block and exactly one coefficient column.
struct OuterFit {
    data: DictionaryData,
}

impl ComponentOracle for OuterFit {
    fn n_components(&self) -> Option<usize> {
        Some(self.data.n_new)
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn grad_component(&self, x: &[f64], id: u64, out: &mut [f64]) {
        let d = &self.data;
        let i = id as usize;
        let code = coeff_block(x, d.m, d.q_dict, i).to_vec();
        let r = residual(x, d.m, |row| d.a_new.get(row, i), &code, d.q_dict);
        out.fill(0.0);
        for (j, cj) in code.iter().enumerate() {
            if *cj != 0.0 {
                let block = &mut out[j * d.m..(j + 1) * d.m];
                for (o, ri) in block.iter_mut().zip(&r) {
                    *o = -cj * ri;
                }
            }
        }
        // coefficient column i: -D^T r
        let off = d.m * d.q_dict + i * d.q_dict;
        for j in 0..d.q_dict {
            let dj = dict_block(x, d.m, j);
            let mut v = 0.0;
            for (dji, ri) in dj.iter().zip(&r) {
                v += dji * ri;
            }
            out[off + j] = -v;
        }
    }

    fn value_component(&self, x: &[f64], id: u64) -> f64 {
        let d = &self.data;
        let i = id as usize;
        let code = coeff_block(x, d.m, d.q_dict, i).to_vec();
        let r = residual(x, d.m, |row| d.a_new.get(row, i), &code, d.q_dict);
        0.5 * r.iter().map(|v| v * v).sum::<f64>()
    }
}
