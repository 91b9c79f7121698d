//! Seeded Monte Carlo checks of the simulator and estimators. Every seed is
//! fixed, so these are deterministic.

mod common;

use qmv_core::experiment::{run_experiment, ExperimentConfig};
use qmv_core::{
    mode_estimate, qmv, simulate_shots, simulate_tally, BitString, Method, NoiseModel, Seed,
};

use common::bits;

const MILLION: u64 = 1_000_000;

#[test]
fn per_qubit_flip_rates_within_five_sigma() {
    let probs = vec![(0.01, 0.2), (0.1, 0.1), (0.3, 0.05), (0.45, 0.45), (0.0, 0.5), (0.2, 0.0)];
    let noise = NoiseModel::per_qubit(probs.clone()).unwrap();
    for (truth, seed) in [("000000", 1), ("111111", 2), ("101010", 3)] {
        let x0 = bits(truth);
        let t = simulate_tally(&x0, &noise, MILLION, Seed(seed)).unwrap();
        for (i, &(p01, p10)) in probs.iter().enumerate() {
            let p = if x0.get(i) { p10 } else { p01 };
            let flips = if x0.get(i) { t.zeros()[i] } else { t.ones()[i] } as f64;
            let sigma = (MILLION as f64 * p * (1.0 - p)).sqrt();
            let dev = (flips - MILLION as f64 * p).abs();
            assert!(dev <= 5.0 * sigma, "{truth} qubit {i}: {flips} flips vs p = {p}");
        }
    }
}

#[test]
fn flips_are_pairwise_uncorrelated() {
    let n = 5;
    let x0 = bits("01101");
    let noise = NoiseModel::per_qubit(vec![(0.1, 0.3), (0.2, 0.2), (0.4, 0.05), (0.25, 0.15), (0.05, 0.35)]).unwrap();
    let counts = simulate_shots(&x0, &noise, MILLION, Seed(77)).unwrap();
    assert_eq!(counts.total_shots(), MILLION);
    let s = MILLION as f64;
    let mut single = vec![0.0; n];
    let mut joint = vec![vec![0.0; n]; n];
    for (k, c) in counts.iter() {
        let flipped: Vec<bool> = (0..n).map(|i| k.get(i) != x0.get(i)).collect();
        for i in 0..n {
            if flipped[i] {
                single[i] += c as f64;
                for j in 0..n {
                    if flipped[j] {
                        joint[i][j] += c as f64;
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (pi, pj) = (single[i] / s, single[j] / s);
            let cov = joint[i][j] / s - pi * pj;
            let r = cov / (pi * (1.0 - pi) * pj * (1.0 - pj)).sqrt();
            // sample correlation of independent indicators has sd ~ 1/sqrt(S)
            assert!(r.abs() <= 5.0 / s.sqrt(), "qubits {i},{j}: r = {r}");
        }
    }
}

#[test]
fn qmv_recovers_alternating_string_every_seed() {
    let x0 = BitString::alternating(25).unwrap();
    assert_eq!(x0.to_string(), "1010101010101010101010101");
    let noise = NoiseModel::symmetric(25, 0.15).unwrap();
    for seed in 0..100 {
        let t = simulate_tally(&x0, &noise, 1000, Seed(seed)).unwrap();
        assert_eq!(qmv(&t).value, x0, "seed {seed}");
    }
}

#[test]
fn mode_under_light_noise_is_truth() {
    let x0 = bits("00000");
    let noise = NoiseModel::symmetric(5, 0.05).unwrap();
    let counts = simulate_shots(&x0, &noise, 10_000, Seed(2024)).unwrap();
    let top = counts.iter().max_by_key(|(_, c)| *c).unwrap();
    assert_eq!(top.0, &x0);
    assert_eq!(mode_estimate(&counts).unwrap().value, x0);
}

fn mean_distances(p: f64) -> Vec<(u64, f64, f64)> {
    let config = serde_json::json!({
        "n": 25,
        "ground_truth": "alternating",
        "noise": {"p": p},
        "shots": [2048, 6144, 24576],
        "estimators": ["mode", "qmv"],
        "seeds": {"start": 0, "count": 100},
    });
    let report = run_experiment(&ExperimentConfig::from_json(config.to_string().as_bytes()).unwrap()).unwrap();
    assert_eq!(report.cells.len(), 600);
    [2048, 6144, 24576]
        .into_iter()
        .map(|s| {
            let mean = |m: Method| {
                report
                    .aggregates
                    .iter()
                    .find(|a| a.estimator == m && a.shots == s)
                    .unwrap()
                    .mean_distance
            };
            (s, mean(Method::Qmv), mean(Method::Mode))
        })
        .collect()
}

#[test]
fn qmv_no_worse_than_mode_at_light_noise() {
    // 0.88^25 * 2048 ~ 84 expected copies of the truth: mode is exact too
    for (s, q, m) in mean_distances(0.12) {
        assert_eq!(q, 0.0, "S = {s}");
        assert!(q <= m, "S = {s}: qmv {q} mode {m}");
    }
}

#[test]
fn qmv_beats_mode_when_truth_is_rarely_observed() {
    // 0.75^25 * 2048 ~ 1.5 expected copies of the truth
    for (s, q, m) in mean_distances(0.25) {
        assert!(q < m, "S = {s}: qmv {q} mode {m}");
    }
}

#[test]
fn noiseless_experiment_is_exact() {
    let config = ExperimentConfig::from_json(
        br#"{
            "n": 9,
            "ground_truth": "alternating",
            "noise": {"p": 0.0},
            "shots": [10, 50],
            "estimators": ["mode", "ml", "map", "qmv", "weighted", "window", "ams"],
            "seeds": [4, 5]
        }"#,
    )
    .unwrap();
    let report = run_experiment(&config).unwrap();
    assert!(report.cells.iter().all(|c| c.distance == 0));
}
