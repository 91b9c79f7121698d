use std::fmt;

/// Distinct failure codes for counts-file ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FileErrorCode {
    /// Not valid JSON, missing or unknown fields, wrong types.
    Schema,
    /// Unsupported `schema_version`.
    Version,
    /// A key whose length differs from the declared `n`.
    LengthMismatch,
    /// A key containing characters other than `0` and `1`.
    BadBit,
    /// A key with a count of zero.
    ZeroCount,
    /// No entries, or `shots` of zero.
    Empty,
    /// `shots` differs from the sum of counts.
    SumMismatch,
}

impl FileErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FileErrorCode::Schema => "SCHEMA",
            FileErrorCode::Version => "VERSION",
            FileErrorCode::LengthMismatch => "LENGTH_MISMATCH",
            FileErrorCode::BadBit => "BAD_BIT",
            FileErrorCode::ZeroCount => "ZERO_COUNT",
            FileErrorCode::Empty => "EMPTY",
            FileErrorCode::SumMismatch => "SUM_MISMATCH",
        }
    }
}

impl fmt::Display for FileErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid value for `{field}`: {reason}")]
    InvalidValue { field: &'static str, reason: String },

    /// The request is well-formed but cannot be served (too many qubits for
    /// an exhaustive scan, a bound outside its valid regime, ...).
    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("{code}: {detail}")]
    File { code: FileErrorCode, detail: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn file(code: FileErrorCode, detail: impl Into<String>) -> Self {
        Error::File {
            code,
            detail: detail.into(),
        }
    }

    /// True for requests that are valid but outside what can be computed.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }

    pub fn file_code(&self) -> Option<FileErrorCode> {
        match self {
            Error::File { code, .. } => Some(*code),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(field: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{p} is not a probability in [0, 1]")))
    }
}
