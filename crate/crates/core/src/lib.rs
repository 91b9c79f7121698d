//! Maximum-likelihood readout error mitigation for quantum algorithms whose
//! ideal output is a single bitstring (or an antipodal pair).
//!
//! The estimators work on a [`CountsTable`] of measured bitstrings under an
//! independent per-qubit bit-flip channel ([`NoiseModel`]):
//!
//! - [`qmv`]: qubit-wise majority vote, the ML estimate for symmetric flips
//! - [`weighted_vote`]: per-qubit log-likelihood ratio for asymmetric flips
//! - [`ml_bruteforce`] / [`map_estimate`] / [`mode_estimate`]: baselines
//! - [`sliding_window_antipodal`]: recovers a complementary pair (GHZ-like)
//! - [`ams`]: adaptive measurement subsetting for close-vote qubits
//!
//! [`budget`] turns the per-qubit error bound into shot counts, and
//! [`experiment`] drives seeded Monte Carlo comparisons.

pub mod ams;
pub mod bits;
pub mod budget;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod io;
pub mod noise;

pub use bits::{hamming_distance, tally, BitString, CountsTable, VoteTally, MAX_QUBITS};
pub use error::{Error, FileErrorCode, Result};
pub use estimators::{
    map_estimate, ml_bruteforce, mode_estimate, qmv, sliding_window_antipodal, weighted_vote,
    AntipodalPair, Estimate, Method, Prior,
};
pub use noise::{
    shot_error_probability_exact, simulate_antipodal, simulate_shots, simulate_tally, NoiseModel,
    Seed, TieRule,
};
