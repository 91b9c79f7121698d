use crate::bits::{BitString, VoteTally};
use crate::error::Result;
use crate::noise::NoiseModel;

use super::{Estimate, Method};

/// Qubit-wise majority vote: qubit `i` is 0 iff `N0i > N1i`, so ties vote 1.
pub fn qmv(tally: &VoteTally) -> Estimate {
    let value = BitString::from_fn(tally.n(), |i| tally.zeros()[i] <= tally.ones()[i])
        .expect("tally has a valid qubit count");
    Estimate {
        value,
        margins: (0..tally.n()).map(|i| tally.margin(i)).collect(),
        method: Method::Qmv,
    }
}

/// Votes on one qubit from one measurement phase, with the flip
/// probabilities that applied during that phase.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PhaseEvidence {
    pub zeros: u64,
    pub ones: u64,
    pub p01: f64,
    pub p10: f64,
}

/// `count * weight`, where a zero count contributes nothing even against an
/// infinite weight.
#[inline]
fn weigh(count: u64, weight: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * weight
    }
}

/// Log-likelihood ratio `ln f(1) - ln f(0)` summed over phases.
///
/// A read 1 adds `ln((1 - p10) / p01)` and a read 0 subtracts
/// `ln((1 - p01) / p10)`. Zero flip probabilities give infinite weights, so
/// impossible readouts decide the qubit outright. Contradictory hard evidence
/// yields NaN.
pub(crate) fn log_likelihood_ratio(phases: &[PhaseEvidence]) -> f64 {
    phases
        .iter()
        .map(|e| {
            let toward_one = ((1.0 - e.p10) / e.p01).ln();
            let toward_zero = ((1.0 - e.p01) / e.p10).ln();
            weigh(e.ones, toward_one) - weigh(e.zeros, toward_zero)
        })
        .sum()
}

/// Decision and |gap| for one qubit; ties (and NaN) vote 1.
pub(crate) fn llr_decision(phases: &[PhaseEvidence]) -> (bool, f64) {
    let llr = log_likelihood_ratio(phases);
    if llr.is_nan() {
        (true, 0.0)
    } else {
        (llr >= 0.0, llr.abs())
    }
}

/// Likelihood-ratio vote for asymmetric flips. With `p01 == p10 < 0.5` on a
/// qubit this is exactly [`qmv`].
pub fn weighted_vote(tally: &VoteTally, noise: &NoiseModel) -> Result<Estimate> {
    noise.check_n(tally.n())?;
    let mut margins = Vec::with_capacity(tally.n());
    let value = BitString::from_fn(tally.n(), |i| {
        let (bit, gap) = llr_decision(&[PhaseEvidence {
            zeros: tally.zeros()[i],
            ones: tally.ones()[i],
            p01: noise.p01(i),
            p10: noise.p10(i),
        }]);
        margins.push(gap);
        bit
    })?;
    Ok(Estimate {
        value,
        margins,
        method: Method::Weighted,
    })
}
