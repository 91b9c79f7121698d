//! Bitstrings, shot records and per-qubit vote tallies.
//!
//! Qubit `i` (0-based in the API) is the `i`-th character from the left in
//! the textual form. Internally bits are packed most-significant-first into
//! `u64` words, so the derived ordering of [`BitString`] is the lexicographic
//! order of the text form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 4096;

const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn word_count(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

#[inline]
fn mask_for(i: usize) -> u64 {
    1u64 << (WORD_BITS - 1 - i % WORD_BITS)
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::invalid(
            "n",
            format!("qubit count {n} outside 1..={MAX_QUBITS}"),
        ));
    }
    Ok(())
}

/// A fixed-length binary word, one bit per qubit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(n: usize) -> Result<Self> {
        check_len(n)?;
        Ok(BitString {
            len: n,
            words: vec![0; word_count(n)],
        })
    }

    pub fn ones(n: usize) -> Result<Self> {
        Ok(Self::zeros(n)?.complement())
    }

    /// Builds a bitstring whose qubit `i` is `f(i)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Result<Self> {
        check_len(n)?;
        let mut words = vec![0u64; word_count(n)];
        for i in 0..n {
            if f(i) {
                words[i / WORD_BITS] |= mask_for(i);
            }
        }
        Ok(BitString { len: n, words })
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    /// `1010...` starting with a one, the pattern used for the random-circuit
    /// benchmarks.
    pub fn alternating(n: usize) -> Result<Self> {
        Self::from_fn(n, |i| i % 2 == 0)
    }

    /// The `index`-th string of `{0,1}^n` in lexicographic order; qubit 0 is
    /// the most significant bit of `index`.
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        if n > 63 {
            return Err(Error::Infeasible(format!(
                "index enumeration supports at most 63 qubits, got {n}"
            )));
        }
        if index >> n != 0 {
            return Err(Error::invalid("index", format!("{index} >= 2^{n}")));
        }
        Self::from_fn(n, |i| (index >> (n - 1 - i)) & 1 == 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Caller guarantees `words.len() == ceil(len / 64)` with a zero tail.
    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), word_count(len));
        BitString { len, words }
    }

    /// Packed words, most significant bit first; unused trailing bits are zero.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "qubit {i} out of range for n = {}", self.len);
        self.words[i / WORD_BITS] & mask_for(i) != 0
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        self.clear_tail(&mut words);
        BitString {
            len: self.len,
            words,
        }
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.same_len(other)?;
        Ok(BitString {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Copy with qubit `i` inverted.
    pub fn with_flipped(&self, i: usize) -> Self {
        assert!(i < self.len);
        let mut out = self.clone();
        out.words[i / WORD_BITS] ^= mask_for(i);
        out
    }

    /// Text order reversed, for ingesting right-to-left device conventions.
    pub fn reversed(&self) -> Self {
        let n = self.len;
        Self::from_fn(n, |i| self.get(n - 1 - i)).expect("length already validated")
    }

    /// Output qubit `i` takes input qubit `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len {
            return Err(Error::DimensionMismatch {
                what: "permutation",
                expected: self.len,
                actual: perm.len(),
            });
        }
        Self::from_fn(self.len, |i| self.get(perm[i]))
    }

    /// Bit `i` of the result is `self[i] XOR self[i + 1]`; length `n - 1`.
    pub fn adjacent_differences(&self) -> Result<Self> {
        if self.len < 2 {
            return Err(Error::invalid("n", "need at least two qubits"));
        }
        let mut words: Vec<u64> = Vec::with_capacity(word_count(self.len - 1));
        for (w, &word) in self.words.iter().enumerate() {
            // bit j+1 shifted into position j, borrowing the top bit of the next word
            let carry = self.words.get(w + 1).map_or(0, |next| next >> 63);
            words.push(word ^ ((word << 1) | carry));
        }
        words.truncate(word_count(self.len - 1));
        let mut out = BitString {
            len: self.len - 1,
            words: Vec::new(),
        };
        out.clear_tail(&mut words);
        out.words = words;
        Ok(out)
    }

    fn clear_tail(&self, words: &mut [u64]) {
        let used = self.len % WORD_BITS;
        if used != 0 {
            if let Some(last) = words.last_mut() {
                *last &= !(u64::MAX >> used);
            }
        }
    }

    fn same_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                what: "bitstring length",
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if let Some(pos) = bytes.iter().position(|&b| b != b'0' && b != b'1') {
            return Err(Error::Malformed(format!(
                "bitstring {s:?} has a non-binary character at position {pos}"
            )));
        }
        Self::from_fn(bytes.len(), |i| bytes[i] == b'1')
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &BitString, b: &BitString) -> Result<usize> {
    a.same_len(b)?;
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum())
}

/// The shot record: distinct measured bitstrings with their multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountsTable {
    n: usize,
    entries: BTreeMap<BitString, u64>,
    total: u64,
}

impl CountsTable {
    /// Builds a table from `(bitstring, count)` pairs; repeated keys are merged.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BitString, u64)>,
    {
        check_len(n)?;
        let mut entries = BTreeMap::new();
        let mut total: u64 = 0;
        for (key, count) in pairs {
            if key.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "counts key length",
                    expected: n,
                    actual: key.len(),
                });
            }
            if count == 0 {
                return Err(Error::Malformed(format!("count for {key} is zero")));
            }
            total = total
                .checked_add(count)
                .ok_or_else(|| Error::Malformed("shot total overflows u64".into()))?;
            *entries.entry(key).or_insert(0) += count;
        }
        if total == 0 {
            return Err(Error::Malformed("counts table has no shots".into()));
        }
        Ok(CountsTable { n, entries, total })
    }

    /// Builds a table from individual shots.
    pub fn from_shots<I>(n: usize, shots: I) -> Result<Self>
    where
        I: IntoIterator<Item = BitString>,
    {
        Self::from_pairs(n, shots.into_iter().map(|s| (s, 1)))
    }

    /// Parses `(text, count)` pairs; the length of the first key fixes `n`.
    pub fn from_text_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let parsed = pairs
            .into_iter()
            .map(|(k, c)| Ok((k.parse::<BitString>()?, c)))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed
            .first()
            .map(|(k, _)| k.len())
            .ok_or_else(|| Error::Malformed("counts table has no entries".into()))?;
        Self::from_pairs(n, parsed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_shots(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn count(&self, key: &BitString) -> u64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    /// Entries in lexicographic key order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&BitString, u64)> {
        self.entries.iter().map(|(k, &c)| (k, c))
    }

    /// Applies `f` to every key, merging any keys that collide.
    pub fn map_keys(&self, f: impl Fn(&BitString) -> BitString) -> Result<Self> {
        let pairs: Vec<_> = self.iter().map(|(k, c)| (f(k), c)).collect();
        let n = pairs.first().map_or(self.n, |(k, _)| k.len());
        Self::from_pairs(n, pairs)
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        if factor == 0 {
            return Err(Error::invalid("factor", "must be positive"));
        }
        let mut pairs = Vec::with_capacity(self.entries.len());
        for (k, c) in self.iter() {
            let c = c
                .checked_mul(factor)
                .ok_or_else(|| Error::Malformed("scaled count overflows u64".into()))?;
            pairs.push((k.clone(), c));
        }
        Self::from_pairs(self.n, pairs)
    }

    /// Multiset union of two shot records.
    pub fn merged(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                what: "counts table qubits",
                expected: self.n,
                actual: other.n,
            });
        }
        let pairs = self.iter().chain(other.iter()).map(|(k, c)| (k.clone(), c));
        Self::from_pairs(self.n, pairs)
    }
}

/// Per-qubit zero/one counts over a shot record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VoteTally {
    n: usize,
    zeros: Vec<u64>,
    ones: Vec<u64>,
    shots: u64,
}

impl VoteTally {
    /// Builds a tally from explicit per-qubit counts, checking
    /// `zeros[i] + ones[i]` is the same for every qubit.
    pub fn from_counts(zeros: Vec<u64>, ones: Vec<u64>) -> Result<Self> {
        if zeros.len() != ones.len() {
            return Err(Error::DimensionMismatch {
                what: "tally ones",
                expected: zeros.len(),
                actual: ones.len(),
            });
        }
        check_len(zeros.len())?;
        let shots = zeros[0]
            .checked_add(ones[0])
            .ok_or_else(|| Error::Malformed("tally overflows u64".into()))?;
        if shots == 0 {
            return Err(Error::Malformed("tally has no shots".into()));
        }
        for (i, (z, o)) in zeros.iter().zip(&ones).enumerate() {
            if z.checked_add(*o) != Some(shots) {
                return Err(Error::Malformed(format!(
                    "qubit {i}: zeros + ones != {shots}"
                )));
            }
        }
        Ok(VoteTally {
            n: zeros.len(),
            zeros,
            ones,
            shots,
        })
    }

    pub(crate) fn from_ones(ones: Vec<u64>, shots: u64) -> Self {
        let zeros = ones.iter().map(|o| shots - o).collect();
        VoteTally {
            n: ones.len(),
            zeros,
            ones,
            shots,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn zeros(&self) -> &[u64] {
        &self.zeros
    }

    pub fn ones(&self) -> &[u64] {
        &self.ones
    }

    /// Empirical frequency of zeros on qubit `i`.
    pub fn p0(&self, i: usize) -> f64 {
        self.zeros[i] as f64 / self.shots as f64
    }

    pub fn p1(&self, i: usize) -> f64 {
        self.ones[i] as f64 / self.shots as f64
    }

    /// `|N0 - N1| / S` for qubit `i`.
    pub fn margin(&self, i: usize) -> f64 {
        self.zeros[i].abs_diff(self.ones[i]) as f64 / self.shots as f64
    }

    /// Sum of two independent tallies over the same qubits.
    pub fn pooled(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                what: "tally qubits",
                expected: self.n,
                actual: other.n,
            });
        }
        let zeros = self.zeros.iter().zip(&other.zeros).map(|(a, b)| a + b).collect();
        let ones = self.ones.iter().zip(&other.ones).map(|(a, b)| a + b).collect();
        Self::from_counts(zeros, ones)
    }
}

/// Below this many `entries x words`, tallying stays on the calling thread.
const PARALLEL_TALLY_WORK: usize = 1 << 16;

/// Adds `count` to `ones[i]` for every set qubit `i` of `key`.
#[inline]
pub(crate) fn accumulate_ones(ones: &mut [u64], key: &[u64], count: u64) {
    for (w, &word) in key.iter().enumerate() {
        let mut rest = word;
        while rest != 0 {
            let lead = rest.leading_zeros() as usize;
            ones[w * WORD_BITS + lead] += count;
            rest &= !(1u64 << (WORD_BITS - 1 - lead));
        }
    }
}

/// Per-qubit vote counts of a shot record.
pub fn tally(counts: &CountsTable) -> VoteTally {
    let n = counts.n();
    let work = counts.distinct().saturating_mul(word_count(n));
    let ones = if work < PARALLEL_TALLY_WORK {
        let mut ones = vec![0u64; n];
        for (key, c) in counts.iter() {
            accumulate_ones(&mut ones, key.words(), c);
        }
        ones
    } else {
        let entries: Vec<(&BitString, u64)> = counts.iter().collect();
        entries
            .par_chunks(1024)
            .map(|chunk| {
                let mut ones = vec![0u64; n];
                for (key, c) in chunk {
                    accumulate_ones(&mut ones, key.words(), *c);
                }
                ones
            })
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    };
    VoteTally::from_ones(ones, counts.total_shots())
}
