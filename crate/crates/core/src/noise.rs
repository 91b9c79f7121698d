//! Independent per-qubit bit-flip readout channel and a seeded shot sampler.
//!
//! Shots are generated in fixed-size blocks. Block `b` draws from a ChaCha8
//! stream keyed by the seed with stream id `b`, so the output does not depend
//! on how many worker threads process the blocks.

use std::collections::HashMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bits::{accumulate_ones, word_count, BitString, CountsTable, VoteTally};
use crate::error::{check_probability, Error, Result};

/// Shots per RNG stream.
pub const SHOT_BLOCK: u64 = 4096;

/// Master seed for a simulation request.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Independent child seed for a named sub-task (splitmix64 finalizer).
    pub fn derive(self, tag: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Per-qubit flip probabilities: `p01 = Pr(read 1 | true 0)`,
/// `p10 = Pr(read 0 | true 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    p01: Vec<f64>,
    p10: Vec<f64>,
}

impl NoiseModel {
    pub fn uniform(n: usize, p01: f64, p10: f64) -> Result<Self> {
        Self::per_qubit(vec![(p01, p10); n])
    }

    pub fn symmetric(n: usize, p: f64) -> Result<Self> {
        Self::uniform(n, p, p)
    }

    pub fn per_qubit(probs: Vec<(f64, f64)>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("noise", "no qubits"));
        }
        for &(a, b) in &probs {
            check_probability("p01", a)?;
            check_probability("p10", b)?;
        }
        let (p01, p10) = probs.into_iter().unzip();
        Ok(NoiseModel { p01, p10 })
    }

    pub fn n(&self) -> usize {
        self.p01.len()
    }

    pub fn p01(&self, i: usize) -> f64 {
        self.p01[i]
    }

    pub fn p10(&self, i: usize) -> f64 {
        self.p10[i]
    }

    pub fn is_symmetric(&self, i: usize) -> bool {
        self.p01[i] == self.p10[i]
    }

    /// Largest flip probability over all qubits and both directions.
    pub fn worst_flip(&self) -> f64 {
        self.p01.iter().chain(&self.p10).copied().fold(0.0, f64::max)
    }

    /// The shared `(p01, p10)` when every qubit has the same pair.
    pub fn as_uniform(&self) -> Option<(f64, f64)> {
        let first = (self.p01[0], self.p10[0]);
        (0..self.n())
            .all(|i| (self.p01[i], self.p10[i]) == first)
            .then_some(first)
    }

    /// Copy with qubit `i`'s flip probabilities multiplied by `factor`.
    pub fn with_qubit_scaled(&self, i: usize, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::invalid("factor", format!("{factor} outside (0, 1]")));
        }
        let mut out = self.clone();
        out.p01[i] *= factor;
        out.p10[i] *= factor;
        Ok(out)
    }

    pub(crate) fn check_n(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                what: "noise model qubits",
                expected: n,
                actual: self.n(),
            });
        }
        Ok(())
    }
}

/// `Pr(flip) * 2^64`, compared against a uniform `u64`; `None` means always flip.
fn flip_threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        // exact for p = k / 2^53; saturating cast is fine since p < 1
        Some((p * 18_446_744_073_709_551_616.0) as u64)
    }
}

#[derive(Clone, Copy)]
enum Truth<'a> {
    Single(&'a BitString),
    /// Each shot picks the string or its complement with probability 1/2.
    Antipodal(&'a BitString),
}

struct Sampler {
    n: usize,
    truth_words: Vec<u64>,
    antipodal: bool,
    // thresholds when the true bit is 0 / 1
    when_zero: Vec<Option<u64>>,
    when_one: Vec<Option<u64>>,
}

impl Sampler {
    fn new(truth: Truth<'_>, noise: &NoiseModel) -> Result<Self> {
        let (x0, antipodal) = match truth {
            Truth::Single(x) => (x, false),
            Truth::Antipodal(x) => (x, true),
        };
        noise.check_n(x0.len())?;
        Ok(Sampler {
            n: x0.len(),
            truth_words: x0.words().to_vec(),
            antipodal,
            when_zero: noise.p01.iter().map(|&p| flip_threshold(p)).collect(),
            when_one: noise.p10.iter().map(|&p| flip_threshold(p)).collect(),
        })
    }

    /// Writes one noisy shot into `out`.
    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [u64]) {
        out.copy_from_slice(&self.truth_words);
        let complemented = self.antipodal && rng.next_u64() >> 63 == 1;
        for i in 0..self.n {
            let w = i / 64;
            let mask = 1u64 << (63 - i % 64);
            let truth_one = (out[w] & mask != 0) ^ complemented;
            let thr = if truth_one {
                self.when_one[i]
            } else {
                self.when_zero[i]
            };
            let read_one = match thr {
                None => !truth_one,
                Some(t) => (rng.next_u64() < t) ^ truth_one,
            };
            if read_one {
                out[w] |= mask;
            } else {
                out[w] &= !mask;
            }
        }
    }

    fn blocks(shots: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
        let count = usize::try_from(shots.div_ceil(SHOT_BLOCK)).expect("block count fits usize");
        (0..count).into_par_iter().map(move |b| {
            let b = b as u64;
            let start = b * SHOT_BLOCK;
            (b, (shots - start).min(SHOT_BLOCK))
        })
    }

    fn rng(seed: Seed, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
        rng.set_stream(block);
        rng
    }

    fn counts(&self, shots: u64, seed: Seed) -> Result<CountsTable> {
        let words = word_count(self.n);
        let partials: Vec<HashMap<BitString, u64>> = Self::blocks(shots)
            .map(|(b, len)| {
                let mut rng = Self::rng(seed, b);
                let mut buf = vec![0u64; words];
                let mut local: HashMap<BitString, u64> = HashMap::new();
                for _ in 0..len {
                    self.draw(&mut rng, &mut buf);
                    *local
                        .entry(BitString::from_words(self.n, buf.clone()))
                        .or_insert(0) += 1;
                }
                local
            })
            .collect();
        CountsTable::from_pairs(self.n, partials.into_iter().flatten())
    }

    fn tally(&self, shots: u64, seed: Seed) -> VoteTally {
        let words = word_count(self.n);
        let ones = Self::blocks(shots)
            .map(|(b, len)| {
                let mut rng = Self::rng(seed, b);
                let mut buf = vec![0u64; words];
                let mut ones = vec![0u64; self.n];
                for _ in 0..len {
                    self.draw(&mut rng, &mut buf);
                    accumulate_ones(&mut ones, &buf, 1);
                }
                ones
            })
            .reduce(
                || vec![0u64; self.n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        VoteTally::from_ones(ones, shots)
    }
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::invalid("shots", "must be at least 1"));
    }
    Ok(())
}

/// Draws `shots` independent noisy readouts of `x0`.
pub fn simulate_shots(x0: &BitString, noise: &NoiseModel, shots: u64, seed: Seed) -> Result<CountsTable> {
    check_shots(shots)?;
    Sampler::new(Truth::Single(x0), noise)?.counts(shots, seed)
}

/// Same random stream as [`simulate_shots`], reduced straight to per-qubit
/// counts: `simulate_tally(..) == tally(&simulate_shots(..))`.
pub fn simulate_tally(x0: &BitString, noise: &NoiseModel, shots: u64, seed: Seed) -> Result<VoteTally> {
    check_shots(shots)?;
    Ok(Sampler::new(Truth::Single(x0), noise)?.tally(shots, seed))
}

/// Shots from a circuit whose correct outputs are `x` and its complement,
/// each with weight 1/2 (e.g. a GHZ state).
pub fn simulate_antipodal(x: &BitString, noise: &NoiseModel, shots: u64, seed: Seed) -> Result<CountsTable> {
    check_shots(shots)?;
    Sampler::new(Truth::Antipodal(x), noise)?.counts(shots, seed)
}

/// How a tied per-qubit vote (`f = S/2` flips) is scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieRule {
    /// Ties count as errors (a true 0 is voted 1 on ties).
    #[default]
    TieIsError,
    TieIsCorrect,
}

/// `ln Pr(Binomial(trials, p) = k)`, with `0 * ln 0 = 0`.
pub(crate) fn ln_binomial_pmf(trials: u64, k: u64, p: f64) -> f64 {
    let ln_choose = ln_gamma(trials as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((trials - k) as f64 + 1.0);
    ln_choose + xlny(k, p) + xlny(trials - k, 1.0 - p)
}

/// `count * ln(p)` with `0 * ln(0) = 0`.
#[inline]
pub(crate) fn xlny(count: u64, p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * p.ln()
    }
}

/// Neumaier-compensated sum.
pub(crate) fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Exact probability that a majority vote over `shots` readouts of one qubit
/// is wrong when each readout flips with probability `p`.
pub fn shot_error_probability_exact(shots: u64, p: f64, rule: TieRule) -> Result<f64> {
    check_shots(shots)?;
    check_probability("p", p)?;
    let first = match rule {
        TieRule::TieIsError => shots.div_ceil(2),
        TieRule::TieIsCorrect => shots / 2 + 1,
    };
    if first > shots {
        return Ok(0.0);
    }
    let logs: Vec<f64> = (first..=shots)
        .map(|f| ln_binomial_pmf(shots, f, p))
        .filter(|l| l.is_finite())
        .collect();
    let Some(peak) = logs.iter().copied().reduce(f64::max) else {
        return Ok(0.0);
    };
    let total = peak.exp() * stable_sum(logs.iter().map(|l| (l - peak).exp()));
    Ok(total.min(1.0))
}
