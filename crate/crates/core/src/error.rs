use chrono::NaiveDate;
use thiserror::Error;

use crate::series::Violation;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Input or configuration violates a documented invariant.
    Validation,
    /// A numerical routine could not produce a result for valid input.
    Computation,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series `{id}` violates {} invariant(s); first: {}", violations.len(), violations.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidSeries { id: String, violations: Vec<Violation> },

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("invalid configuration `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("no business dates between {start} and {end}")]
    EmptyWindow { start: NaiveDate, end: NaiveDate },

    #[error("insufficient data for {what}: need {needed}, got {got}")]
    InsufficientData { what: &'static str, needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("relative difference denominator below the zero-level floor on {} date(s), first {}", dates.len(), dates.first().map(|d| d.to_string()).unwrap_or_default())]
    NearZeroDenominator { dates: Vec<NaiveDate> },

    #[error("level polynomial is non-positive ({value}) at level {level}")]
    NonPositivePolynomial { level: f64, value: f64 },

    #[error("level function is non-positive at level {level}")]
    NonPositiveScale { level: f64 },

    #[error("bootstrap failed to converge at pillar {pillar} ({instrument})")]
    NonConvergence { pillar: f64, instrument: String },

    #[error("{what} {value} outside [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("negative input to {0}")]
    NegativeInput(&'static str),

    #[error("singular design matrix: all levels equal")]
    SingularDesign,

    #[error("need at least {needed} non-thin buckets, got {got}")]
    InsufficientBuckets { needed: usize, got: usize },

    #[error("no bucket reaches the minimum count of {min_count}")]
    AllThin { min_count: usize },

    #[error("ratio denominator non-positive at level {level}")]
    DivisionDomain { level: f64 },

    #[error("lookup cell (model `{model}`, tenor {tenor}, bucket {bucket}) failed: {source}")]
    LookupCell {
        model: String,
        tenor: String,
        bucket: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidSeries { .. }
            | Error::InvalidPanel(_)
            | Error::InvalidConfig { .. }
            | Error::EmptyWindow { .. }
            | Error::EmptyInput
            | Error::NegativeInput(_)
            | Error::OutOfRange { .. }
            | Error::Parse { .. } => ErrorKind::Validation,
            Error::LookupCell { source, .. } => source.kind(),
            _ => ErrorKind::Computation,
        }
    }

    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig { field, reason: reason.into() }
    }
}
