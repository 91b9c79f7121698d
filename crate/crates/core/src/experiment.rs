//! Seeded Monte Carlo comparisons of the estimators.
//!
//! A config names a ground truth, a noise model, shot counts, estimators and
//! seeds. Every `(shots, seed)` pair simulates one shot record that all
//! estimators except AMS share; AMS spends the same budget through its own
//! two-phase schedule. Cells run in parallel and are reported in config order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::ams::{run_ams, MergeRule, DEFAULT_SUBSET_NOISE_FACTOR};
use crate::bits::{hamming_distance, tally, BitString, CountsTable};
use crate::budget::{budget_report, m3_shot_requirement, per_qubit_target_bound, required_shots};
use crate::error::{Error, Result};
use crate::estimators::{
    map_estimate, ml_bruteforce, mode_estimate, qmv, sliding_window_antipodal, weighted_vote,
    AntipodalPair, Method, Prior, ML_MAX_QUBITS,
};
use crate::noise::{simulate_antipodal, simulate_shots, NoiseModel, Seed};

/// What the ideal circuit outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundTruth {
    /// `1010...`
    Alternating,
    AllZeros,
    /// All-zeros and all-ones with equal weight.
    GhzAntipodal,
    Explicit(BitString),
}

impl GroundTruth {
    fn name(&self) -> String {
        match self {
            GroundTruth::Alternating => "alternating".into(),
            GroundTruth::AllZeros => "all-zeros".into(),
            GroundTruth::GhzAntipodal => "ghz-antipodal".into(),
            GroundTruth::Explicit(b) => b.to_string(),
        }
    }

    fn bitstring(&self, n: usize) -> Result<BitString> {
        match self {
            GroundTruth::Alternating => BitString::alternating(n),
            GroundTruth::AllZeros | GroundTruth::GhzAntipodal => BitString::zeros(n),
            GroundTruth::Explicit(b) => Ok(b.clone()),
        }
    }
}

impl<'de> Deserialize<'de> for GroundTruth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(match s.as_str() {
            "alternating" => GroundTruth::Alternating,
            "all-zeros" => GroundTruth::AllZeros,
            "ghz-antipodal" => GroundTruth::GhzAntipodal,
            other => GroundTruth::Explicit(other.parse().map_err(|e: Error| {
                serde::de::Error::custom(format!(
                    "ground_truth must be alternating, all-zeros, ghz-antipodal or a bitstring: {e}"
                ))
            })?),
        })
    }
}

impl Serialize for GroundTruth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Noise description: exactly one of `p`, `p01`+`p10`, or `per_qubit`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p01: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p10: Option<f64>,
    /// `[p01, p10]` per qubit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_qubit: Option<Vec<[f64; 2]>>,
}

impl NoiseSpec {
    pub fn build(&self, n: usize) -> Result<NoiseModel> {
        match (self.p, self.p01, self.p10, &self.per_qubit) {
            (Some(p), None, None, None) => NoiseModel::symmetric(n, p),
            (None, Some(a), Some(b), None) => NoiseModel::uniform(n, a, b),
            (None, None, None, Some(list)) => {
                if list.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "noise.per_qubit",
                        expected: n,
                        actual: list.len(),
                    });
                }
                NoiseModel::per_qubit(list.iter().map(|[a, b]| (*a, *b)).collect())
            }
            _ => Err(Error::invalid(
                "noise",
                "give exactly one of `p`, both `p01` and `p10`, or `per_qubit`",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmsSettings {
    pub tau: f64,
    #[serde(default = "default_factor")]
    pub factor: f64,
    #[serde(default)]
    pub merge: MergeRule,
}

fn default_factor() -> f64 {
    DEFAULT_SUBSET_NOISE_FACTOR
}

impl Default for AmsSettings {
    fn default() -> Self {
        AmsSettings {
            tau: 0.01,
            factor: DEFAULT_SUBSET_NOISE_FACTOR,
            merge: MergeRule::Pool,
        }
    }
}

/// Either an explicit list or `{"start": a, "count": k}` for `a..a+k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { start: u64, count: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { start, count } => (*start..start + count).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Required for generated ground truths; must match an explicit one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub ground_truth: GroundTruth,
    pub noise: NoiseSpec,
    pub shots: Vec<u64>,
    pub estimators: Vec<Method>,
    pub seeds: SeedSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ams: Option<AmsSettings>,
    /// Prior for `map`; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Prior>,
    /// Wall times make reports non-reproducible, so they are opt-in.
    #[serde(default)]
    pub record_timing: bool,
}

/// A validated config with the derived objects it needs.
struct Plan {
    n: usize,
    truth: BitString,
    antipodal: bool,
    noise: NoiseModel,
    ams: AmsSettings,
    prior: Prior,
    seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Malformed(format!("experiment config: {e}")))
    }

    fn plan(&self) -> Result<Plan> {
        let n = match (&self.ground_truth, self.n) {
            (GroundTruth::Explicit(b), Some(n)) if b.len() != n => {
                return Err(Error::DimensionMismatch {
                    what: "ground_truth length",
                    expected: n,
                    actual: b.len(),
                })
            }
            (GroundTruth::Explicit(b), _) => b.len(),
            (_, Some(n)) => n,
            (_, None) => return Err(Error::invalid("n", "required for generated ground truths")),
        };
        let truth = self.ground_truth.bitstring(n)?;
        let noise = self.noise.build(n)?;
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimators", "at least one estimator is required"));
        }
        if self.shots.is_empty() || self.shots.contains(&0) {
            return Err(Error::invalid("shots", "need at least one positive shot count"));
        }
        let seeds = self.seeds.seeds();
        if seeds.is_empty() {
            return Err(Error::invalid("seeds", "at least one seed is required"));
        }
        let prior = self.prior.clone().unwrap_or(Prior::Uniform);
        let ams = self.ams.clone().unwrap_or_default();
        for m in &self.estimators {
            match m {
                Method::Ml if n > ML_MAX_QUBITS => {
                    return Err(Error::Infeasible(format!(
                        "estimator ml needs n <= {ML_MAX_QUBITS}, got {n}"
                    )))
                }
                Method::Map if matches!(prior, Prior::Uniform) && n > ML_MAX_QUBITS => {
                    return Err(Error::Infeasible(format!(
                        "estimator map with a uniform prior needs n <= {ML_MAX_QUBITS}, got {n}"
                    )))
                }
                Method::Window if n < 2 => {
                    return Err(Error::invalid("estimators", "window needs n >= 2"))
                }
                Method::Ams => {
                    if let Some(s) = self.shots.iter().find(|s| *s % 2 != 0) {
                        return Err(Error::invalid("shots", format!("ams needs even shot counts, got {s}")));
                    }
                    if !(ams.tau > 0.0 && ams.tau < 1.0) {
                        return Err(Error::invalid("ams.tau", format!("{} outside (0, 1)", ams.tau)));
                    }
                    if !(ams.factor > 0.0 && ams.factor <= 1.0) {
                        return Err(Error::invalid("ams.factor", format!("{} outside (0, 1]", ams.factor)));
                    }
                }
                _ => {}
            }
        }
        Ok(Plan {
            n,
            truth,
            antipodal: self.ground_truth == GroundTruth::GhzAntipodal,
            noise,
            ams,
            prior,
            seeds,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub estimator: Method,
    pub shots: u64,
    pub seed: u64,
    pub estimate: BitString,
    pub distance: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub estimator: Method,
    pub shots: u64,
    pub runs: usize,
    pub mean_distance: f64,
    pub min_distance: usize,
    pub max_distance: usize,
    /// Runs with distance 0.
    pub exact_recoveries: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotBudget {
    pub shots: u64,
    /// `None` for odd shot counts.
    pub bound_per_qubit: Option<f64>,
    pub bound_any_qubit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetSummary {
    /// Largest flip probability of the model, used as the symmetric `p`.
    pub p: f64,
    pub required_shots: u64,
    pub target_per_qubit: f64,
    pub m3_shots_estimate: f64,
    pub per_shots: Vec<ShotBudget>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub n: usize,
    pub ground_truth: GroundTruth,
    pub cells: Vec<Cell>,
    pub aggregates: Vec<Aggregate>,
    /// Absent when some flip probability is >= 0.5 or `n < 2`.
    pub budget: Option<BudgetSummary>,
}

fn distance(plan: &Plan, method: Method, estimate: &BitString) -> Result<usize> {
    if plan.antipodal || method == Method::Window {
        AntipodalPair::new(plan.truth.clone()).distance_to(estimate)
    } else {
        hamming_distance(&plan.truth, estimate)
    }
}

fn estimate_one(plan: &Plan, counts: &CountsTable, method: Method, shots: u64, seed: u64) -> Result<BitString> {
    Ok(match method {
        Method::Mode => mode_estimate(counts)?.value,
        Method::Ml => ml_bruteforce(counts, &plan.noise)?.value,
        Method::Map => map_estimate(counts, &plan.noise, &plan.prior)?.value,
        Method::Qmv => qmv(&tally(counts)).value,
        Method::Weighted => weighted_vote(&tally(counts), &plan.noise)?.value,
        Method::Window => sliding_window_antipodal(counts)?.x,
        Method::Ams => {
            let (_, out) = run_ams(
                &plan.truth,
                &plan.noise,
                shots,
                plan.ams.tau,
                plan.ams.factor,
                Seed(seed),
                plan.ams.merge,
            )?;
            out.estimate.value
        }
    })
}

fn run_cell_group(config: &ExperimentConfig, plan: &Plan, shots: u64, seed: u64) -> Result<Vec<Cell>> {
    let counts = if plan.antipodal {
        simulate_antipodal(&plan.truth, &plan.noise, shots, Seed(seed))?
    } else {
        simulate_shots(&plan.truth, &plan.noise, shots, Seed(seed))?
    };
    config
        .estimators
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let estimate = estimate_one(plan, &counts, method, shots, seed)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            Ok(Cell {
                estimator: method,
                shots,
                seed,
                distance: distance(plan, method, &estimate)?,
                estimate,
                runtime_ms: config.record_timing.then_some(elapsed),
            })
        })
        .collect()
}

fn budget_summary(plan: &Plan, shots: &[u64]) -> Result<Option<BudgetSummary>> {
    let p = plan.noise.worst_flip();
    if p >= 0.5 || plan.n < 2 {
        return Ok(None);
    }
    let n = plan.n as u64;
    let per_shots = shots
        .iter()
        .map(|&s| {
            let even = s >= 2 && s % 2 == 0;
            let report = if even { Some(budget_report(n, p, Some(s))?) } else { None };
            Ok(ShotBudget {
                shots: s,
                bound_per_qubit: report.as_ref().map(|r| r.bound_per_qubit),
                bound_any_qubit: report.as_ref().map(|r| r.bound_any_qubit),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(BudgetSummary {
        p,
        required_shots: required_shots(n, 0.5 - p)?,
        target_per_qubit: per_qubit_target_bound(n, 0.5 - p)?,
        m3_shots_estimate: m3_shot_requirement(n, p)?,
        per_shots,
    }))
}

/// Runs every `(shots, seed, estimator)` cell of `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let plan = config.plan()?;
    let groups: Vec<(u64, u64)> = config
        .shots
        .iter()
        .flat_map(|&s| plan.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let cells: Vec<Cell> = groups
        .par_iter()
        .map(|&(shots, seed)| run_cell_group(config, &plan, shots, seed))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut aggregates = Vec::new();
    for &shots in &config.shots {
        for &method in &config.estimators {
            let d: Vec<usize> = cells
                .iter()
                .filter(|c| c.shots == shots && c.estimator == method)
                .map(|c| c.distance)
                .collect();
            aggregates.push(Aggregate {
                estimator: method,
                shots,
                runs: d.len(),
                mean_distance: d.iter().sum::<usize>() as f64 / d.len() as f64,
                min_distance: d.iter().copied().min().unwrap_or(0),
                max_distance: d.iter().copied().max().unwrap_or(0),
                exact_recoveries: d.iter().filter(|&&x| x == 0).count(),
            });
        }
    }

    Ok(Report {
        n: plan.n,
        ground_truth: config.ground_truth.clone(),
        cells,
        aggregates,
        budget: budget_summary(&plan, &config.shots)?,
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per cell: `estimator,S,seed,distance,runtime_ms`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["estimator", "S", "seed", "distance", "runtime_ms"])
            .expect("in-memory write");
        for c in &self.cells {
            w.write_record([
                c.estimator.as_str().to_string(),
                c.shots.to_string(),
                c.seed.to_string(),
                c.distance.to_string(),
                c.runtime_ms.map(|t| t.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
    }
}
