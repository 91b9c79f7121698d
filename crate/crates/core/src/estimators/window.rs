use serde::Serialize;

use crate::bits::{tally, BitString, CountsTable};
use crate::error::{Error, Result};

/// A bitstring and its complement, stored with qubit 0 of `x` equal to 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AntipodalPair {
    pub x: BitString,
    pub x_complement: BitString,
    /// `|agree - disagree|` shot counts for the window over qubits `(i, i + 1)`.
    pub window_margins: Vec<u64>,
}

impl AntipodalPair {
    /// Canonicalizes so that `x` starts with 0.
    pub fn new(x: BitString) -> Self {
        let x = if x.get(0) { x.complement() } else { x };
        let x_complement = x.complement();
        AntipodalPair {
            x,
            x_complement,
            window_margins: Vec::new(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        !self.x.get(0)
    }

    /// Whether `s` is one of the two strings.
    pub fn contains(&self, s: &BitString) -> bool {
        &self.x == s || &self.x_complement == s
    }

    /// Distance from `s` to the nearer member of the pair.
    pub fn distance_to(&self, s: &BitString) -> Result<usize> {
        Ok(crate::hamming_distance(&self.x, s)?.min(crate::hamming_distance(&self.x_complement, s)?))
    }
}

/// Recovers an antipodal output pair from two-qubit windows `(i, i + 1)`.
///
/// Each window votes between "equal" (`00`/`11`) and "different"
/// (`01`/`10`); ties count as equal. The relations are chained from
/// `x_0 = 0`.
pub fn sliding_window_antipodal(counts: &CountsTable) -> Result<AntipodalPair> {
    let n = counts.n();
    if n < 2 {
        return Err(Error::invalid("n", "sliding window needs at least two qubits"));
    }
    let differences = counts.map_keys(|k| k.adjacent_differences().expect("n >= 2"))?;
    let votes = tally(&differences);
    let mut bits = Vec::with_capacity(n);
    bits.push(false);
    for w in 0..n - 1 {
        let disagree = votes.ones()[w];
        let agree = votes.zeros()[w];
        let flip = disagree > agree;
        bits.push(bits[w] ^ flip);
    }
    let mut pair = AntipodalPair::new(BitString::from_bools(&bits)?);
    pair.window_margins = (0..n - 1)
        .map(|w| votes.zeros()[w].abs_diff(votes.ones()[w]))
        .collect();
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, u64)]) -> CountsTable {
        CountsTable::from_text_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn pure_ghz() {
        let p = sliding_window_antipodal(&counts(&[("0000", 50), ("1111", 50)])).unwrap();
        assert_eq!(p.x.to_string(), "0000");
        assert_eq!(p.x_complement.to_string(), "1111");
        assert!(p.is_canonical());
    }

    #[test]
    fn every_window_tied_chains_equal() {
        // windows (0,1), (1,2): each sees one agreeing and one disagreeing shot
        let p = sliding_window_antipodal(&counts(&[("001", 1), ("110", 1), ("011", 1), ("100", 1)])).unwrap();
        assert_eq!(p.x.to_string(), "000");
        assert_eq!(p.window_margins, vec![0, 0]);
    }

    #[test]
    fn recovers_non_trivial_pattern() {
        let p = sliding_window_antipodal(&counts(&[("10110", 40), ("01001", 35), ("10111", 8)])).unwrap();
        assert_eq!(p.x.to_string(), "01001");
        assert!(p.contains(&"10110".parse().unwrap()));
    }

    #[test]
    fn needs_two_qubits() {
        assert!(sliding_window_antipodal(&counts(&[("1", 3)])).is_err());
    }

    #[test]
    fn canonical_constructor() {
        let p = AntipodalPair::new("110".parse().unwrap());
        assert_eq!(p.x.to_string(), "001");
        assert_eq!(p.distance_to(&"111".parse().unwrap()).unwrap(), 1);
    }
}
