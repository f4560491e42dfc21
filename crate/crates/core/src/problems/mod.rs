//! Built-in problem generators and data-file loaders.
//!
//! Three families cover the benchmark suite: constrained least squares with a
//! validation objective on top, minimal-norm logistic regression, and an
//! incremental dictionary-learning problem with a nonconvex outer level. All
//! generators plant a known interior inner optimum when run noiselessly, so
//! inner gaps have an exact zero reference. Loaders bring in external data in
//! CSV or svmlight form.

pub mod dictionary;
pub mod io;
pub mod logistic;
pub mod regression;

pub use dictionary::DictionaryData;
pub use io::{load_csv, load_libsvm, load_matrix_csv};
pub use logistic::LogisticData;
pub use regression::RegressionData;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Standard normal via Box-Muller; keeps generators free of distribution
/// crates so data files are reproducible from the seed alone.
pub(crate) fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
