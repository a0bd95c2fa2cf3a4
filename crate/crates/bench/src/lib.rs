//! Shared inputs for the benchmarks.

use mdfield::rng::StreamKey;
use mdfield::{CoeffTensor, EmpiricalDist};

/// Two-term chaos tensor on disjoint index triples.
pub fn two_term_tensor() -> CoeffTensor {
    CoeffTensor::new(3, vec![(vec![1, 1, 1], 0.6), (vec![2, 2, 2], 0.8)]).expect("valid tensor")
}

/// `n` standard normal draws as an empirical distribution.
pub fn normal_sample(n: usize, seed: u64) -> EmpiricalDist {
    let key = StreamKey::root(seed);
    let draws = (0..n as i64).map(|i| key.normal(i)).collect();
    EmpiricalDist::new(draws, "bench").expect("at least two draws")
}
