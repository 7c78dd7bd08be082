//! Shared fixtures for the criterion benchmarks.

use nalgebra::DMatrix;
use rand::Rng;
use spar_core::rng::stream;
use spar_core::sim::{self, CovarianceKind, SimSpec, Sparsity};
use spar_core::FamilyLink;

/// A simulated training set.
pub fn dataset(fl: FamilyLink, n: usize, p: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let spec = SimSpec::new(fl, n, p, Sparsity::Medium, CovarianceKind::Block);
    let s = sim::simulate(&spec, &mut stream(seed, 0)).expect("valid simulation spec");
    (s.train.x, s.train.y)
}

/// Uniform scores with a fixed fraction of positive labels.
pub fn scored_labels(n: usize, seed: u64) -> (Vec<bool>, Vec<f64>) {
    let mut rng = stream(seed, 1);
    let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
    let scores = labels.iter().map(|&l| rng.random::<f64>() + if l { 0.3 } else { 0.0 }).collect();
    (labels, scores)
}
