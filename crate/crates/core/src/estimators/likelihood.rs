//! Exhaustive maximum-likelihood and maximum-a-posteriori estimation.
//!
//! [`ml_bruteforce`] scores every candidate in `{0,1}^n` by the full shot
//! log-likelihood and never uses the per-qubit decision rules, so it serves
//! as the reference the vote-based estimators are checked against.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BitString, CountsTable};
use crate::error::{check_probability, Error, Result};
use crate::noise::NoiseModel;

use super::vote::{log_likelihood_ratio, PhaseEvidence};
use super::{Estimate, Method};

/// Largest `n` for the exhaustive scan.
pub const ML_MAX_QUBITS: usize = 24;

/// Largest `n` for an explicit prior table.
pub const TABLE_PRIOR_MAX_QUBITS: usize = 20;

const TABLE_NORMALIZATION_TOL: f64 = 1e-9;

/// Prior knowledge about the correct output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Prior {
    /// Every output equally likely; MAP coincides with ML.
    Uniform,
    /// Independent `Pr(x_i = 1)` per qubit; 0 or 1 pins the qubit.
    PerQubit(Vec<f64>),
    /// Explicit `Pr(x)`; omitted strings have probability 0.
    Table(BTreeMap<BitString, f64>),
}

impl Prior {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Prior::Uniform => Ok(()),
            Prior::PerQubit(pi) => {
                if pi.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "per-qubit prior",
                        expected: n,
                        actual: pi.len(),
                    });
                }
                pi.iter().try_for_each(|&p| check_probability("prior", p))
            }
            Prior::Table(table) => {
                if n > TABLE_PRIOR_MAX_QUBITS {
                    return Err(Error::Infeasible(format!(
                        "table priors support at most {TABLE_PRIOR_MAX_QUBITS} qubits, got {n}"
                    )));
                }
                for (x, &p) in table {
                    if x.len() != n {
                        return Err(Error::DimensionMismatch {
                            what: "prior table key length",
                            expected: n,
                            actual: x.len(),
                        });
                    }
                    check_probability("prior", p)?;
                }
                let total: f64 = table.values().sum();
                if (total - 1.0).abs() > TABLE_NORMALIZATION_TOL {
                    return Err(Error::invalid(
                        "prior",
                        format!("table sums to {total}, not 1"),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Column-major view of a counts table with the per-qubit channel logs.
struct LikelihoodModel {
    n: usize,
    counts: Vec<f64>,
    /// `columns[i][e]`: bit `i` of entry `e`
    columns: Vec<Vec<bool>>,
    /// `log_channel[i][truth][read]` = `ln Pr(read | truth)` on qubit `i`
    log_channel: Vec<[[f64; 2]; 2]>,
}

impl LikelihoodModel {
    fn new(counts: &CountsTable, noise: &NoiseModel) -> Result<Self> {
        let n = counts.n();
        noise.check_n(n)?;
        let entries: Vec<_> = counts.iter().collect();
        let columns = (0..n)
            .map(|i| entries.iter().map(|(k, _)| k.get(i)).collect())
            .collect();
        let log_channel = (0..n)
            .map(|i| {
                let (p01, p10) = (noise.p01(i), noise.p10(i));
                [
                    [(1.0 - p01).ln(), p01.ln()],
                    [p10.ln(), (1.0 - p10).ln()],
                ]
            })
            .collect();
        Ok(LikelihoodModel {
            n,
            counts: entries.iter().map(|(_, c)| *c as f64).collect(),
            columns,
            log_channel,
        })
    }

    /// `sum_i sum_s ln Pr(y_si | x_i)` for candidate `index`, qubit-major.
    fn log_likelihood(&self, index: u64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            let truth = ((index >> (self.n - 1 - i)) & 1) as usize;
            let [read0, read1] = self.log_channel[i][truth];
            let mut qubit = 0.0;
            for (&c, &bit) in self.counts.iter().zip(&self.columns[i]) {
                let l = if bit { read1 } else { read0 };
                qubit += c * l;
            }
            total += qubit;
        }
        total
    }
}

/// Index and score of the best candidate; NaN scores lose and ties go to
/// the smallest index.
fn argmax_candidates(n: usize, score: impl Fn(u64) -> f64 + Sync) -> (u64, f64) {
    let better = |a: (u64, f64), b: (u64, f64)| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    let sanitize = |s: f64| if s.is_nan() { f64::NEG_INFINITY } else { s };
    let total = 1u64 << n;
    const CHUNK: u64 = 1 << 12;
    (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            (start..end)
                .map(|k| (k, sanitize(score(k))))
                .fold((start, f64::NEG_INFINITY), better)
        })
        .reduce(|| (u64::MAX, f64::NEG_INFINITY), better)
}

fn check_scan_size(n: usize) -> Result<()> {
    if n > ML_MAX_QUBITS {
        return Err(Error::Infeasible(format!(
            "exhaustive search supports at most {ML_MAX_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Exhaustive search over all candidates `x`, scoring each by the joint
/// score `score(x)`; margins are the score drop from flipping each qubit.
fn exhaustive(n: usize, method: Method, score: impl Fn(u64) -> f64 + Sync) -> Result<Estimate> {
    let (best, best_score) = argmax_candidates(n, &score);
    let margins = (0..n)
        .map(|i| {
            let other = score(best ^ (1u64 << (n - 1 - i)));
            let gap = best_score - other;
            if gap.is_nan() {
                0.0
            } else {
                gap
            }
        })
        .collect();
    Ok(Estimate {
        value: BitString::from_index(n, best)?,
        margins,
        method,
    })
}

/// Maximum-likelihood estimate by enumeration of all `2^n` candidates.
pub fn ml_bruteforce(counts: &CountsTable, noise: &NoiseModel) -> Result<Estimate> {
    check_scan_size(counts.n())?;
    let model = LikelihoodModel::new(counts, noise)?;
    exhaustive(model.n, Method::Ml, |k| model.log_likelihood(k))
}

/// Maximum-a-posteriori estimate.
///
/// A uniform prior defers to [`ml_bruteforce`]. A per-qubit prior adds
/// `ln(pi / (1 - pi))` to each qubit's log-likelihood ratio, pins qubits with
/// `pi` of 0 or 1 regardless of the readouts, and breaks ties toward 0. A
/// table prior is searched exhaustively.
pub fn map_estimate(counts: &CountsTable, noise: &NoiseModel, prior: &Prior) -> Result<Estimate> {
    let n = counts.n();
    noise.check_n(n)?;
    prior.validate(n)?;
    match prior {
        Prior::Uniform => {
            let mut e = ml_bruteforce(counts, noise)?;
            e.method = Method::Map;
            Ok(e)
        }
        Prior::PerQubit(pi) => {
            let t = crate::bits::tally(counts);
            let mut margins = Vec::with_capacity(n);
            let value = BitString::from_fn(n, |i| {
                let (bit, gap) = match pi[i] {
                    0.0 => (false, f64::INFINITY),
                    1.0 => (true, f64::INFINITY),
                    p => {
                        let llr = log_likelihood_ratio(&[PhaseEvidence {
                            zeros: t.zeros()[i],
                            ones: t.ones()[i],
                            p01: noise.p01(i),
                            p10: noise.p10(i),
                        }]);
                        let post = llr + (p / (1.0 - p)).ln();
                        if post.is_nan() {
                            (false, 0.0)
                        } else {
                            (post > 0.0, post.abs())
                        }
                    }
                };
                margins.push(gap);
                bit
            })?;
            Ok(Estimate {
                value,
                margins,
                method: Method::Map,
            })
        }
        Prior::Table(table) => {
            let model = LikelihoodModel::new(counts, noise)?;
            let mut log_prior = vec![f64::NEG_INFINITY; 1usize << n];
            for (x, &p) in table {
                let k = x.iter().fold(0usize, |acc, b| (acc << 1) | b as usize);
                log_prior[k] = p.ln();
            }
            exhaustive(n, Method::Map, |k| {
                let lp = log_prior[k as usize];
                if lp == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    lp + model.log_likelihood(k)
                }
            })
        }
    }
}
