//! Fixed inputs shared by the benchmarks.

use qmv_core::{simulate_shots, BitString, CountsTable, NoiseModel, Seed};

/// Flip probability used by every fixture.
pub const FIXTURE_P: f64 = 0.12;

/// Alternating `n`-qubit truth read `shots` times under symmetric noise.
pub fn noisy_counts(n: usize, shots: u64, seed: u64) -> (BitString, NoiseModel, CountsTable) {
    let x0 = BitString::alternating(n).expect("n >= 1");
    let noise = NoiseModel::symmetric(n, FIXTURE_P).expect("valid p");
    let counts = simulate_shots(&x0, &noise, shots, Seed(seed)).expect("valid request");
    (x0, noise, counts)
}

/// Like [`noisy_counts`] with different flip rates for 0 and 1.
pub fn asymmetric_counts(n: usize, shots: u64, seed: u64) -> (NoiseModel, CountsTable) {
    let x0 = BitString::alternating(n).expect("n >= 1");
    let noise = NoiseModel::uniform(n, 0.05, 0.2).expect("valid p");
    let counts = simulate_shots(&x0, &noise, shots, Seed(seed)).expect("valid request");
    (noise, counts)
}
