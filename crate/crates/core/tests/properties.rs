mod common;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::subsequence;

use qmv_core::ams::{ams_combine, ams_plan, MergeRule, SubsetResult};
use qmv_core::budget::{qmv_error_bound, required_shots};
use qmv_core::experiment::{run_experiment, ExperimentConfig};
use qmv_core::io::{parse_counts, serialize_counts, BitOrder};
use qmv_core::{
    hamming_distance, map_estimate, ml_bruteforce, mode_estimate, qmv, shot_error_probability_exact,
    simulate_shots, sliding_window_antipodal, tally, weighted_vote, BitString, CountsTable,
    NoiseModel, Prior, Seed, TieRule, VoteTally,
};

use common::{naive_llr, naive_ml, naive_ones};

fn bitstring(n: impl Strategy<Value = usize>) -> impl Strategy<Value = BitString> {
    n.prop_flat_map(|n| vec(any::<bool>(), n)).prop_map(|v| BitString::from_bools(&v).unwrap())
}

fn counts_with(n: usize, max_entries: usize, max_count: u64) -> impl Strategy<Value = CountsTable> {
    vec((vec(any::<bool>(), n), 1..=max_count), 1..=max_entries).prop_map(move |entries| {
        CountsTable::from_pairs(
            n,
            entries
                .into_iter()
                .map(|(b, c)| (BitString::from_bools(&b).unwrap(), c)),
        )
        .unwrap()
    })
}

fn counts(max_n: usize) -> impl Strategy<Value = CountsTable> {
    (1..=max_n).prop_flat_map(|n| counts_with(n, 12, 5))
}

fn symmetric_p() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.05, 0.2, 0.35, 0.45])
}

fn flip() -> impl Strategy<Value = f64> {
    0.01f64..0.49
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn tally_ignores_regrouping(t in counts(70), splits in vec(1u64..4, 1..40)) {
        // break every entry into several smaller entries and rebuild
        let mut pairs = Vec::new();
        for (j, (k, c)) in t.iter().enumerate() {
            let parts = splits[j % splits.len()].min(c);
            for p in 0..parts {
                let share = c / parts + u64::from(p < c % parts);
                pairs.push((k.clone(), share));
            }
        }
        pairs.reverse();
        let regrouped = CountsTable::from_pairs(t.n(), pairs).unwrap();
        prop_assert_eq!(tally(&regrouped), tally(&t));

        let v = tally(&t);
        let ones = naive_ones(&t);
        prop_assert_eq!(v.ones(), ones.as_slice());
        for i in 0..v.n() {
            prop_assert_eq!(v.zeros()[i] + v.ones()[i], t.total_shots());
        }
    }

    #[test]
    fn hamming_metric(n in 1usize..=64, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::random_bits(&mut rng, n);
        let b = common::random_bits(&mut rng, n);
        let c = common::random_bits(&mut rng, n);
        let ab = hamming_distance(&a, &b).unwrap();
        let bc = hamming_distance(&b, &c).unwrap();
        let ac = hamming_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc);
        prop_assert_eq!(ab, hamming_distance(&b, &a).unwrap());
        prop_assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        prop_assert_eq!(hamming_distance(&a, &a.complement()).unwrap(), n);
        let by_hand = a.iter().zip(b.iter()).filter(|(x, y)| x != y).count();
        prop_assert_eq!(ab, by_hand);
    }

    #[test]
    fn qmv_matches_ml_on_untied_qubits(t in counts(10), p in symmetric_p()) {
        let noise = NoiseModel::symmetric(t.n(), p).unwrap();
        let v = tally(&t);
        let q = qmv(&v);
        let ml = ml_bruteforce(&t, &noise).unwrap();
        for i in 0..t.n() {
            if v.zeros()[i] != v.ones()[i] {
                prop_assert_eq!(q.value.get(i), ml.value.get(i), "qubit {}", i);
            }
        }
    }

    #[test]
    fn ml_matches_naive_oracle(t in counts(8), p01 in flip(), p10 in flip()) {
        let noise = NoiseModel::uniform(t.n(), p01, p10).unwrap();
        let oracle = naive_ml(&t, &noise);
        let ml = ml_bruteforce(&t, &noise).unwrap();
        if oracle.best_score - oracle.runner_up > 1e-9 {
            prop_assert_eq!(ml.value, oracle.best);
        }
    }

    #[test]
    fn weighted_matches_ml(t in counts(10), p01 in flip(), p10 in flip()) {
        let noise = NoiseModel::uniform(t.n(), p01, p10).unwrap();
        let v = tally(&t);
        let w = weighted_vote(&v, &noise).unwrap();
        let ml = ml_bruteforce(&t, &noise).unwrap();
        for i in 0..t.n() {
            let llr = naive_llr(v.zeros()[i], v.ones()[i], p01, p10);
            if llr.abs() > 1e-9 {
                prop_assert_eq!(w.value.get(i), llr > 0.0);
                prop_assert_eq!(ml.value.get(i), llr > 0.0);
            }
        }
    }

    #[test]
    fn map_uniform_is_ml(t in counts(10), p01 in flip(), p10 in flip()) {
        let noise = NoiseModel::uniform(t.n(), p01, p10).unwrap();
        let ml = ml_bruteforce(&t, &noise).unwrap();
        let map = map_estimate(&t, &noise, &Prior::Uniform).unwrap();
        prop_assert_eq!(map.value, ml.value);
        prop_assert_eq!(map.margins, ml.margins);
    }

    #[test]
    fn weighted_symmetric_is_qmv(t in counts(70), p in 0.001f64..0.499) {
        let v = tally(&t);
        let noise = NoiseModel::symmetric(t.n(), p).unwrap();
        prop_assert_eq!(weighted_vote(&v, &noise).unwrap().value, qmv(&v).value);
    }

    #[test]
    fn votes_commute_with_permutations(
        (t, perm) in (1usize..=20).prop_flat_map(|n| (counts_with(n, 12, 5), permutation(n))),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let n = t.n();
        let mut rng = common::rng(seed);
        let probs: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.01..0.49), rng.random_range(0.01..0.49)))
            .collect();
        let noise = NoiseModel::per_qubit(probs.clone()).unwrap();
        let permuted_noise = NoiseModel::per_qubit(perm.iter().map(|&j| probs[j]).collect()).unwrap();
        let pt = t.map_keys(|k| k.permuted(&perm).unwrap()).unwrap();

        let q = qmv(&tally(&t)).value.permuted(&perm).unwrap();
        prop_assert_eq!(qmv(&tally(&pt)).value, q);
        let w = weighted_vote(&tally(&t), &noise).unwrap().value.permuted(&perm).unwrap();
        prop_assert_eq!(weighted_vote(&tally(&pt), &permuted_noise).unwrap().value, w);
    }

    #[test]
    fn window_ignores_global_complement(t in (2usize..=40).prop_flat_map(|n| counts_with(n, 15, 4))) {
        let flipped = t.map_keys(BitString::complement).unwrap();
        let a = sliding_window_antipodal(&t).unwrap();
        let b = sliding_window_antipodal(&flipped).unwrap();
        prop_assert_eq!(&a.x, &b.x);
        prop_assert_eq!(&a.x_complement, &b.x_complement);
        prop_assert!(a.is_canonical());
        prop_assert_eq!(a.x.complement(), a.x_complement);
    }

    #[test]
    fn estimates_ignore_count_scaling(t in counts(40), factor in 1u64..50, p01 in flip(), p10 in flip()) {
        let s = t.scaled(factor).unwrap();
        let noise = NoiseModel::uniform(t.n(), p01, p10).unwrap();
        prop_assert_eq!(mode_estimate(&s).unwrap().value, mode_estimate(&t).unwrap().value);
        prop_assert_eq!(qmv(&tally(&s)).value, qmv(&tally(&t)).value);
        prop_assert_eq!(
            weighted_vote(&tally(&s), &noise).unwrap().value,
            weighted_vote(&tally(&t), &noise).unwrap().value
        );
    }

    #[test]
    fn ams_close_set_grows_with_threshold(t in counts(30), a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let v = tally(&t);
        let total = 2 * v.shots();
        let small = ams_plan(&v, lo, total).unwrap();
        let large = ams_plan(&v, hi, total).unwrap();
        prop_assert!(small.close_qubits.iter().all(|q| large.close_qubits.contains(q)));
        for plan in [&small, &large] {
            prop_assert_eq!(plan.insufficient, plan.per_subset_shots.is_some_and(|s| s < 100));
            prop_assert!(plan.shots_used() <= total);
        }
    }

    #[test]
    fn ams_unit_factor_pooling_is_weighted_vote(
        t in counts(12),
        extra in vec((0u64..200, 0u64..200), 12),
        p01 in flip(),
        p10 in flip(),
    ) {
        let v = tally(&t);
        let noise = NoiseModel::uniform(t.n(), p01, p10).unwrap();
        let plan = ams_plan(&v, 0.999, 2 * v.shots()).unwrap();
        let subsets: Vec<SubsetResult> = plan
            .close_qubits
            .iter()
            .map(|&q| SubsetResult { qubit: q, zeros: extra[q].0, ones: extra[q].1 })
            .collect();
        let est = ams_combine(&plan, &noise, &subsets, 1.0, MergeRule::Pool).unwrap();
        for i in 0..t.n() {
            let (z, o) = subsets
                .iter()
                .find(|s| s.qubit == i)
                .map_or((0, 0), |s| (s.zeros, s.ones));
            let pooled = VoteTally::from_counts(vec![v.zeros()[i] + z], vec![v.ones()[i] + o]).unwrap();
            let one = NoiseModel::uniform(1, p01, p10).unwrap();
            prop_assert_eq!(est.value.get(i), weighted_vote(&pooled, &one).unwrap().value.get(0));
        }
    }

    #[test]
    fn bound_dominates_and_is_monotone(half in 1u64..=1000, p in 0.001f64..0.499, dp in 0.0f64..0.1) {
        let s = 2 * half;
        let b = qmv_error_bound(s, p).unwrap();
        prop_assert!(b >= shot_error_probability_exact(s, p, TieRule::TieIsError).unwrap());
        prop_assert!(qmv_error_bound(s + 2, p).unwrap() <= b);
        let q = (p + dp).min(0.4999);
        prop_assert!(qmv_error_bound(s, q).unwrap() >= b);
    }

    #[test]
    fn required_shots_monotone(n in 2u64..100_000, dn in 0u64..1000, eps in 0.01f64..0.5, de in 0.0f64..0.2) {
        let s = required_shots(n, eps).unwrap();
        prop_assert_eq!(s % 2, 0);
        prop_assert!(required_shots(n + dn, eps).unwrap() >= s);
        let smaller = (eps - de).max(0.005);
        prop_assert!(required_shots(n, smaller).unwrap() >= s);
    }

    #[test]
    fn exact_tail_matches_binomial_oracle(shots in 1u64..3000, p in 0.0f64..=1.0) {
        let ours = shot_error_probability_exact(shots, p, TieRule::TieIsError).unwrap();
        let oracle = common::binomial_tail_oracle(shots, p);
        prop_assert!((ours - oracle).abs() <= 1e-12 + 1e-9 * oracle, "{} vs {}", ours, oracle);
    }

    #[test]
    fn simulation_is_a_pure_function(x in bitstring(1usize..=90), p in 0.0f64..=1.0, shots in 1u64..9000, seed in any::<u64>()) {
        let noise = NoiseModel::symmetric(x.len(), p).unwrap();
        let a = simulate_shots(&x, &noise, shots, Seed(seed)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate_shots(&x, &noise, shots, Seed(seed)).unwrap());
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.total_shots(), shots);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn counts_file_round_trip(t in counts(70), right in any::<bool>()) {
        let order = if right { BitOrder::Right } else { BitOrder::Left };
        let text = serialize_counts(&t, order);
        prop_assert_eq!(parse_counts(text.as_bytes(), order).unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn report_csv_agrees_with_json(
        n in 2usize..=10,
        p in 0.0f64..0.4,
        shots in subsequence(vec![16u64, 64, 100, 256], 1..=4),
        methods in subsequence(vec!["mode", "ml", "map", "qmv", "weighted", "window", "ams"], 1..=7),
        seeds in vec(any::<u32>(), 1..4),
    ) {
        let config = serde_json::json!({
            "n": n,
            "ground_truth": "alternating",
            "noise": {"p": p},
            "shots": shots,
            "estimators": methods,
            "seeds": seeds,
            "ams": {"tau": 0.2},
        });
        let config = ExperimentConfig::from_json(config.to_string().as_bytes()).unwrap();
        let report = run_experiment(&config).unwrap();
        prop_assert_eq!(report.cells.len(), shots.len() * seeds.len() * methods.len());
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let csv_text = report.to_csv();
        let mut rows = csv::Reader::from_reader(csv_text.as_bytes());
        let header = rows.headers().unwrap().clone();
        prop_assert_eq!(header.iter().collect::<Vec<_>>(), vec!["estimator", "S", "seed", "distance", "runtime_ms"]);
        let cells = json["cells"].as_array().unwrap();
        let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
        prop_assert_eq!(records.len(), cells.len());
        for (row, cell) in records.iter().zip(cells) {
            prop_assert_eq!(&row[0], cell["estimator"].as_str().unwrap());
            prop_assert_eq!(row[1].parse::<u64>().unwrap(), cell["shots"].as_u64().unwrap());
            prop_assert_eq!(row[2].parse::<u64>().unwrap(), cell["seed"].as_u64().unwrap());
            prop_assert_eq!(row[3].parse::<u64>().unwrap(), cell["distance"].as_u64().unwrap());
            prop_assert_eq!(&row[4], "");
        }
    }
}
