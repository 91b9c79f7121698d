//! Counts-file interchange format.
//!
//! ```json
//! {"schema_version": "1", "n": 2, "shots": 3, "counts": {"01": 2, "11": 1}}
//! ```
//!
//! Keys are read left to right as qubits `0..n`. Files written by stacks that
//! print qubit 0 rightmost can be ingested with [`BitOrder::Right`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, CountsTable, MAX_QUBITS};
use crate::error::{Error, FileErrorCode, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitOrder {
    /// Character `i` from the left is qubit `i`.
    #[default]
    Left,
    /// Character `i` from the right is qubit `i`.
    Right,
}

impl BitOrder {
    fn apply(self, s: &BitString) -> BitString {
        match self {
            BitOrder::Left => s.clone(),
            BitOrder::Right => s.reversed(),
        }
    }
}

impl std::str::FromStr for BitOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(BitOrder::Left),
            "right" => Ok(BitOrder::Right),
            other => Err(Error::invalid("bit-order", format!("{other:?} is not left or right"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsFile {
    pub schema_version: String,
    pub n: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl CountsFile {
    pub fn from_table(table: &CountsTable, order: BitOrder) -> Self {
        CountsFile {
            schema_version: SCHEMA_VERSION.to_string(),
            n: table.n(),
            shots: table.total_shots(),
            counts: table
                .iter()
                .map(|(k, c)| (order.apply(k).to_string(), c))
                .collect(),
        }
    }

    /// Validates the file and converts it into a counts table.
    pub fn into_table(self, order: BitOrder) -> Result<CountsTable> {
        use FileErrorCode::*;
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::file(
                Version,
                format!("schema_version {:?} is not {SCHEMA_VERSION:?}", self.schema_version),
            ));
        }
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::file(Schema, format!("n = {} outside 1..={MAX_QUBITS}", self.n)));
        }
        if self.counts.is_empty() || self.shots == 0 {
            return Err(Error::file(Empty, "counts file records no shots"));
        }
        let mut sum: u64 = 0;
        let mut pairs = Vec::with_capacity(self.counts.len());
        for (key, count) in &self.counts {
            if key.len() != self.n {
                return Err(Error::file(
                    LengthMismatch,
                    format!("key {key:?} has length {}, expected n = {}", key.len(), self.n),
                ));
            }
            let bits: BitString = key
                .parse()
                .map_err(|e: Error| Error::file(BadBit, e.to_string()))?;
            if *count == 0 {
                return Err(Error::file(ZeroCount, format!("key {key:?} has count 0")));
            }
            sum = sum
                .checked_add(*count)
                .ok_or_else(|| Error::file(SumMismatch, "counts overflow u64"))?;
            pairs.push((order.apply(&bits), *count));
        }
        if sum != self.shots {
            return Err(Error::file(
                SumMismatch,
                format!("counts sum to {sum} but shots = {}", self.shots),
            ));
        }
        CountsTable::from_pairs(self.n, pairs)
    }
}

/// Parses and validates a counts file.
pub fn parse_counts(bytes: &[u8], order: BitOrder) -> Result<CountsTable> {
    let file: CountsFile =
        serde_json::from_slice(bytes).map_err(|e| Error::file(FileErrorCode::Schema, e.to_string()))?;
    file.into_table(order)
}

/// Pretty-printed JSON with keys in sorted order.
pub fn serialize_counts(table: &CountsTable, order: BitOrder) -> String {
    serde_json::to_string_pretty(&CountsFile::from_table(table, order)).expect("counts file serializes")
}
