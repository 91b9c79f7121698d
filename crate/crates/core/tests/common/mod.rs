//! Oracles written independently of the library code paths, plus random
//! instance generators shared by the integration tests.
#![allow(dead_code)]

use qmv_core::{BitString, CountsTable, NoiseModel};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

pub fn random_bits(rng: &mut impl Rng, n: usize) -> BitString {
    let v: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    BitString::from_bools(&v).unwrap()
}

/// Shot records drawn either from a noisy copy of a random string or
/// uniformly at random, flipped with this module's own RNG rather than the
/// library simulator.
pub fn random_counts(rng: &mut impl Rng, n: usize, shots: u64) -> CountsTable {
    let truth = random_bits(rng, n);
    let structured = rng.random_bool(0.7);
    let p = rng.random_range(0.05..0.45);
    let shots: Vec<BitString> = (0..shots)
        .map(|_| {
            if structured {
                let v: Vec<bool> = truth.iter().map(|b| b ^ rng.random_bool(p)).collect();
                BitString::from_bools(&v).unwrap()
            } else {
                random_bits(rng, n)
            }
        })
        .collect();
    let mut pairs: Vec<(BitString, u64)> = shots.into_iter().map(|s| (s, 1)).collect();
    pairs.shuffle(rng);
    CountsTable::from_pairs(n, pairs).unwrap()
}

/// Per-qubit one-counts computed shot by shot.
pub fn naive_ones(counts: &CountsTable) -> Vec<u64> {
    let mut ones = vec![0u64; counts.n()];
    for (k, c) in counts.iter() {
        for (i, b) in k.iter().enumerate() {
            if b {
                ones[i] += c;
            }
        }
    }
    ones
}

/// `ln Pr(read y | true x)` for one qubit.
fn ln_channel(x: bool, y: bool, p01: f64, p10: f64) -> f64 {
    match (x, y) {
        (false, false) => (1.0 - p01).ln(),
        (false, true) => p01.ln(),
        (true, false) => p10.ln(),
        (true, true) => (1.0 - p10).ln(),
    }
}

pub struct MlOracle {
    pub best: BitString,
    pub best_score: f64,
    pub runner_up: f64,
}

/// Scores every candidate entry by entry. Ties keep the earlier
/// (lexicographically smaller) candidate.
pub fn naive_ml(counts: &CountsTable, noise: &NoiseModel) -> MlOracle {
    let n = counts.n();
    assert!(n <= 16);
    let mut best = (f64::NEG_INFINITY, 0u64);
    let mut runner_up = f64::NEG_INFINITY;
    for idx in 0..(1u64 << n) {
        let x = BitString::from_index(n, idx).unwrap();
        let mut score = 0.0;
        for (y, c) in counts.iter() {
            for i in 0..n {
                score += c as f64 * ln_channel(x.get(i), y.get(i), noise.p01(i), noise.p10(i));
            }
        }
        if score > best.0 {
            runner_up = best.0;
            best = (score, idx);
        } else if score > runner_up {
            runner_up = score;
        }
    }
    MlOracle {
        best: BitString::from_index(n, best.1).unwrap(),
        best_score: best.0,
        runner_up,
    }
}

/// Per-qubit log-likelihood ratio `ln Pr(obs | 1) - ln Pr(obs | 0)`.
pub fn naive_llr(zeros: u64, ones: u64, p01: f64, p10: f64) -> f64 {
    let one = ones as f64 * (1.0 - p10).ln() + zeros as f64 * p10.ln();
    let zero = ones as f64 * p01.ln() + zeros as f64 * (1.0 - p01).ln();
    one - zero
}

/// Exact majority-vote error from the binomial survival function.
pub fn binomial_tail_oracle(shots: u64, p: f64) -> f64 {
    use statrs::distribution::{Binomial, DiscreteCDF};
    let first = shots.div_ceil(2);
    let b = Binomial::new(p, shots).unwrap();
    if first == 0 {
        1.0
    } else {
        b.sf(first - 1)
    }
}
