//! Adaptive measurement subsetting.
//!
//! Half of the shot budget measures every qubit. Qubits whose vote margin
//! `|N0 - N1| / k` falls below a threshold are then re-measured one at a time
//! with the other half split evenly between them. Measuring a single qubit
//! lets it be placed on a better physical qubit, which the simulation models
//! by scaling that qubit's flip probabilities by `subset_noise_factor`.
//!
//! Seeds: phase 1 uses `seed.derive(0)`, the pooled full-measurement second
//! phase (no close qubits) uses `seed.derive(1)`, and the subset run for qubit
//! `q` uses `seed.derive(2 + q)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BitString, VoteTally};
use crate::error::{Error, Result};
use crate::estimators::{llr_decision, Estimate, Method, PhaseEvidence};
use crate::noise::{simulate_tally, NoiseModel, Seed};

/// Subset circuits with fewer shots than this are flagged.
pub const MIN_SUBSET_SHOTS: u64 = 100;

pub const DEFAULT_SUBSET_NOISE_FACTOR: f64 = 0.5;

/// How subset readouts combine with the phase-1 votes of the same qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeRule {
    /// Both phases are independent evidence, each under its own noise.
    #[default]
    Pool,
    /// The subset run alone decides a close qubit.
    Replace,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmsPlan {
    pub threshold: f64,
    pub total_shots: u64,
    pub phase1_shots: u64,
    /// 0-based, ascending.
    pub close_qubits: Vec<usize>,
    /// `floor(k / m)`; `None` when there are no close qubits and the second
    /// half is spent on another full measurement.
    pub per_subset_shots: Option<u64>,
    /// Set when `per_subset_shots < MIN_SUBSET_SHOTS`.
    pub insufficient: bool,
    #[serde(skip)]
    pub phase1: VoteTally,
}

impl AmsPlan {
    /// Shots the plan spends; the `k mod m` remainder is left unspent.
    pub fn shots_used(&self) -> u64 {
        match self.per_subset_shots {
            None => 2 * self.phase1_shots,
            Some(per) => self.phase1_shots + per * self.close_qubits.len() as u64,
        }
    }
}

/// Votes from one single-qubit subset circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetResult {
    pub qubit: usize,
    pub zeros: u64,
    pub ones: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmsOutcome {
    pub estimate: Estimate,
    pub subsets: Vec<SubsetResult>,
    pub shots_used: u64,
}

fn check_budget(total_shots: u64) -> Result<()> {
    if total_shots < 2 || total_shots % 2 != 0 {
        return Err(Error::invalid(
            "shots",
            format!("AMS needs an even budget >= 2, got {total_shots}"),
        ));
    }
    Ok(())
}

/// Selects close-vote qubits from a phase-1 tally of `total_shots / 2` shots.
pub fn ams_plan(tally: &VoteTally, tau: f64, total_shots: u64) -> Result<AmsPlan> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid("tau", format!("{tau} outside (0, 1)")));
    }
    check_budget(total_shots)?;
    let k = total_shots / 2;
    if tally.shots() != k {
        return Err(Error::invalid(
            "tally",
            format!("phase 1 has {} shots, expected {k}", tally.shots()),
        ));
    }
    let close_qubits: Vec<usize> = (0..tally.n()).filter(|&i| tally.margin(i) < tau).collect();
    let per_subset_shots = match close_qubits.len() as u64 {
        0 => None,
        m => Some(k / m),
    };
    Ok(AmsPlan {
        threshold: tau,
        total_shots,
        phase1_shots: k,
        insufficient: per_subset_shots.is_some_and(|s| s < MIN_SUBSET_SHOTS),
        close_qubits,
        per_subset_shots,
        phase1: tally.clone(),
    })
}

/// Phase 1: `total_shots / 2` shots measuring every qubit.
pub fn ams_phase1(x0: &BitString, noise: &NoiseModel, total_shots: u64, seed: Seed) -> Result<VoteTally> {
    check_budget(total_shots)?;
    simulate_tally(x0, noise, total_shots / 2, seed.derive(0))
}

fn check_factor(factor: f64) -> Result<()> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(Error::invalid(
            "subset_noise_factor",
            format!("{factor} outside (0, 1]"),
        ));
    }
    Ok(())
}

/// Combines phase-1 votes with subset results into a final estimate.
///
/// Qubits outside the close set are decided by a weighted vote on phase 1.
/// Close qubits without a subset result fall back to phase 1 as well.
pub fn ams_combine(
    plan: &AmsPlan,
    noise: &NoiseModel,
    subsets: &[SubsetResult],
    subset_noise_factor: f64,
    merge: MergeRule,
) -> Result<Estimate> {
    let n = plan.phase1.n();
    noise.check_n(n)?;
    check_factor(subset_noise_factor)?;
    let mut subset_for = vec![None; n];
    for s in subsets {
        if s.qubit >= n {
            return Err(Error::invalid("qubit", format!("{} >= n = {n}", s.qubit)));
        }
        if !plan.close_qubits.contains(&s.qubit) {
            return Err(Error::invalid(
                "qubit",
                format!("{} is not a close-vote qubit of this plan", s.qubit),
            ));
        }
        subset_for[s.qubit] = Some(*s);
    }
    let phase1 = &plan.phase1;
    let mut margins = Vec::with_capacity(n);
    let value = BitString::from_fn(n, |i| {
        let full = PhaseEvidence {
            zeros: phase1.zeros()[i],
            ones: phase1.ones()[i],
            p01: noise.p01(i),
            p10: noise.p10(i),
        };
        let subset = subset_for[i]
            .filter(|s| s.zeros + s.ones > 0)
            .map(|s| PhaseEvidence {
                zeros: s.zeros,
                ones: s.ones,
                p01: noise.p01(i) * subset_noise_factor,
                p10: noise.p10(i) * subset_noise_factor,
            });
        let (bit, gap) = match (subset, merge) {
            (None, _) => llr_decision(&[full]),
            (Some(s), MergeRule::Pool) => llr_decision(&[full, s]),
            (Some(s), MergeRule::Replace) => llr_decision(&[s]),
        };
        margins.push(gap);
        bit
    })?;
    Ok(Estimate {
        value,
        margins,
        method: Method::Ams,
    })
}

/// Runs the second phase of `plan` against ground truth `x0` and merges.
pub fn ams_execute(
    x0: &BitString,
    noise: &NoiseModel,
    plan: &AmsPlan,
    subset_noise_factor: f64,
    seed: Seed,
    merge: MergeRule,
) -> Result<AmsOutcome> {
    noise.check_n(x0.len())?;
    noise.check_n(plan.phase1.n())?;
    check_factor(subset_noise_factor)?;
    let Some(per_subset) = plan.per_subset_shots else {
        let second = simulate_tally(x0, noise, plan.phase1_shots, seed.derive(1))?;
        let pooled = plan.phase1.pooled(&second)?;
        let mut estimate = crate::estimators::weighted_vote(&pooled, noise)?;
        estimate.method = Method::Ams;
        return Ok(AmsOutcome {
            estimate,
            subsets: Vec::new(),
            shots_used: plan.shots_used(),
        });
    };
    // one circuit per close qubit, each on its own derived seed
    let subsets: Vec<SubsetResult> = if per_subset == 0 {
        Vec::new()
    } else {
        plan.close_qubits
            .par_iter()
            .map(|&q| {
                let truth = BitString::from_bools(&[x0.get(q)])?;
                let single = NoiseModel::uniform(
                    1,
                    noise.p01(q) * subset_noise_factor,
                    noise.p10(q) * subset_noise_factor,
                )?;
                let t = simulate_tally(&truth, &single, per_subset, seed.derive(2 + q as u64))?;
                Ok(SubsetResult {
                    qubit: q,
                    zeros: t.zeros()[0],
                    ones: t.ones()[0],
                })
            })
            .collect::<Result<_>>()?
    };
    let estimate = ams_combine(plan, noise, &subsets, subset_noise_factor, merge)?;
    Ok(AmsOutcome {
        estimate,
        subsets,
        shots_used: plan.shots_used(),
    })
}

/// Phase 1, planning and phase 2 in one call.
pub fn run_ams(
    x0: &BitString,
    noise: &NoiseModel,
    total_shots: u64,
    tau: f64,
    subset_noise_factor: f64,
    seed: Seed,
    merge: MergeRule,
) -> Result<(AmsPlan, AmsOutcome)> {
    let phase1 = ams_phase1(x0, noise, total_shots, seed)?;
    let plan = ams_plan(&phase1, tau, total_shots)?;
    let outcome = ams_execute(x0, noise, &plan, subset_noise_factor, seed, merge)?;
    Ok((plan, outcome))
}
