//! Shot budgets for qubit-wise majority vote under symmetric flips.
//!
//! For an even shot count `S` and flip probability `p < 1/2`, the chance that
//! the vote on one qubit comes out wrong is the binomial tail
//! `sum_{a <= S/2} C(S, a) (1-p)^a p^(S-a)`. Its largest term `f(S/2)` times a
//! geometric series with ratio `b = S/(S+2) * p/(1-p)` bounds the tail, and
//! bounding `C(S, S/2)` by `sqrt(2/(pi S)) 2^S` gives the closed form
//!
//! ```text
//! (4 (1-p) p)^(S/2) * sqrt(2 / (pi S)) * (1-p) / (1-2p)
//! ```
//!
//! Each step is exposed so tests can check the chain one inequality at a
//! time.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::noise::{ln_binomial_pmf, shot_error_probability_exact, TieRule};

fn check_even_shots(shots: u64) -> Result<()> {
    if shots < 2 || shots % 2 != 0 {
        return Err(Error::invalid(
            "shots",
            format!("{shots} is not an even count >= 2"),
        ));
    }
    Ok(())
}

fn check_sub_half(p: f64) -> Result<()> {
    check_probability("p", p)?;
    if p >= 0.5 {
        return Err(Error::Infeasible(format!(
            "flip probability {p} >= 0.5: the bound diverges"
        )));
    }
    Ok(())
}

fn check_margin(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::invalid(
            "epsilon",
            format!("{epsilon} outside (0, 0.5]"),
        ));
    }
    Ok(())
}

fn check_qubits(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("n", format!("{n} qubits; need at least 2")));
    }
    Ok(())
}

/// `f(S/2) = C(S, S/2) ((1-p) p)^(S/2)`, the largest term of the error tail.
pub fn peak_term(shots: u64, p: f64) -> Result<f64> {
    check_even_shots(shots)?;
    check_sub_half(p)?;
    Ok(ln_binomial_pmf(shots, shots / 2, p).exp())
}

/// Ratio of consecutive tail terms at the peak, `S/(S+2) * p/(1-p)`.
pub fn geometric_ratio(shots: u64, p: f64) -> Result<f64> {
    check_even_shots(shots)?;
    check_sub_half(p)?;
    Ok(shots as f64 / (shots as f64 + 2.0) * p / (1.0 - p))
}

/// `f(S/2) * (1-p)/(1-2p)`: the tail bounded by a geometric series, before
/// the Stirling step.
pub fn geometric_tail_bound(shots: u64, p: f64) -> Result<f64> {
    Ok(peak_term(shots, p)? * (1.0 - p) / (1.0 - 2.0 * p))
}

/// `sqrt(2 / (pi S)) * 2^S` in log space, the Stirling-style estimate of
/// `C(S, S/2)`.
pub fn ln_central_binomial_estimate(shots: u64) -> Result<f64> {
    check_even_shots(shots)?;
    let s = shots as f64;
    Ok(0.5 * (2.0 / (PI * s)).ln() + s * std::f64::consts::LN_2)
}

/// Closed-form upper bound on `Pr(vote 1 | truth 0)` for one qubit.
pub fn qmv_error_bound(shots: u64, p: f64) -> Result<f64> {
    check_even_shots(shots)?;
    check_sub_half(p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let s = shots as f64;
    let ln = 0.5 * s * (4.0 * (1.0 - p) * p).ln() + 0.5 * (2.0 / (PI * s)).ln() + ((1.0 - p) / (1.0 - 2.0 * p)).ln();
    Ok(ln.exp())
}

fn evenize_up(x: f64) -> u64 {
    let s = x.ceil().max(2.0) as u64;
    s + s % 2
}

/// `ceil(0.5 ln(n) / epsilon^2)`, rounded up to an even count.
pub fn required_shots(n: u64, epsilon: f64) -> Result<u64> {
    check_qubits(n)?;
    check_margin(epsilon)?;
    Ok(shots_for_log_qubits((n as f64).ln(), epsilon))
}

/// [`required_shots`] with `ln(n)` supplied directly.
pub fn shots_for_log_qubits(ln_n: f64, epsilon: f64) -> u64 {
    evenize_up(0.5 * ln_n / (epsilon * epsilon))
}

/// `(1/2 + epsilon) / sqrt(pi ln n) / n`: the per-qubit error the recommended
/// shot count achieves.
pub fn per_qubit_target_bound(n: u64, epsilon: f64) -> Result<f64> {
    check_qubits(n)?;
    check_margin(epsilon)?;
    let nf = n as f64;
    Ok((0.5 + epsilon) / (PI * nf.ln()).sqrt() / nf)
}

/// `(1-p)^(-n)`: shots needed before the correct string is expected to be
/// observed once, the scaling of methods that only reweight observed strings.
pub fn m3_shot_requirement(n: u64, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if p == 1.0 {
        return Err(Error::Infeasible("p = 1: the correct string is never observed".into()));
    }
    Ok((-(n as f64) * (1.0 - p).ln()).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetReport {
    pub n: u64,
    pub p: f64,
    pub epsilon: f64,
    /// Shot count the bounds below are evaluated at.
    pub shots: u64,
    pub bound_per_qubit: f64,
    /// Union bound `min(1, n * bound_per_qubit)`.
    pub bound_any_qubit: f64,
    pub exact_per_qubit: f64,
    pub required_shots: u64,
    pub target_per_qubit: f64,
    pub m3_shots_estimate: f64,
}

/// Budget figures for `n` qubits at flip probability `p`, evaluated at
/// `shots` or, when absent, at [`required_shots`].
pub fn budget_report(n: u64, p: f64, shots: Option<u64>) -> Result<BudgetReport> {
    check_qubits(n)?;
    check_sub_half(p)?;
    let epsilon = 0.5 - p;
    let required = required_shots(n, epsilon)?;
    let shots = shots.unwrap_or(required);
    let bound = qmv_error_bound(shots, p)?;
    Ok(BudgetReport {
        n,
        p,
        epsilon,
        shots,
        bound_per_qubit: bound.min(1.0),
        bound_any_qubit: (n as f64 * bound).min(1.0),
        exact_per_qubit: shot_error_probability_exact(shots, p, TieRule::TieIsError)?,
        required_shots: required,
        target_per_qubit: per_qubit_target_bound(n, epsilon)?,
        m3_shots_estimate: m3_shot_requirement(n, p)?,
    })
}
