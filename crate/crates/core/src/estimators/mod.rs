//! Estimators of the single correct output from a noisy shot record.

mod likelihood;
mod vote;
mod window;

use serde::{Deserialize, Serialize};

use crate::bits::{tally, BitString, CountsTable};
use crate::error::{Error, Result};

pub use likelihood::{map_estimate, ml_bruteforce, Prior, ML_MAX_QUBITS, TABLE_PRIOR_MAX_QUBITS};
pub use vote::{qmv, weighted_vote};
pub(crate) use vote::{llr_decision, PhaseEvidence};
pub use window::{sliding_window_antipodal, AntipodalPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mode,
    Ml,
    Map,
    Qmv,
    Weighted,
    Window,
    Ams,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Mode,
        Method::Ml,
        Method::Map,
        Method::Qmv,
        Method::Weighted,
        Method::Window,
        Method::Ams,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mode => "mode",
            Method::Ml => "ml",
            Method::Map => "map",
            Method::Qmv => "qmv",
            Method::Weighted => "weighted",
            Method::Window => "window",
            Method::Ams => "ams",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown estimator {s:?}")))
    }
}

/// An estimated output with per-qubit confidence.
///
/// `margins[i]` is `|N0 - N1| / S` for [`qmv`], the signed agreement with
/// the chosen bit for [`mode_estimate`], and a log-likelihood gap (possibly
/// infinite under hard evidence) for the likelihood-based methods.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: BitString,
    pub margins: Vec<f64>,
    pub method: Method,
}

/// Most frequently measured bitstring; ties go to the lexicographically
/// smallest.
pub fn mode_estimate(counts: &CountsTable) -> Result<Estimate> {
    let mut best: Option<(&BitString, u64)> = None;
    for (key, c) in counts.iter() {
        if best.map_or(true, |(_, b)| c > b) {
            best = Some((key, c));
        }
    }
    let (value, _) = best.ok_or_else(|| Error::Malformed("empty counts table".into()))?;
    let t = tally(counts);
    let s = t.shots() as f64;
    let margins = (0..t.n())
        .map(|i| {
            let (agree, disagree) = if value.get(i) {
                (t.ones()[i], t.zeros()[i])
            } else {
                (t.zeros()[i], t.ones()[i])
            };
            (agree as f64 - disagree as f64) / s
        })
        .collect();
    Ok(Estimate {
        value: value.clone(),
        margins,
        method: Method::Mode,
    })
}
