//! Dated daily observations and the weekday business calendar.

use std::fmt;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Business calendar: Monday to Friday, no holidays.
pub fn is_business_day(d: NaiveDate) -> bool {
    !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

/// All business days in `[start, end]`.
pub fn business_days(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| is_business_day(*d))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    #[default]
    Decimal,
    BasisPoints,
    Spread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    LengthMismatch,
    DuplicateDate,
    DatesNotIncreasing,
    NonBusinessDay,
    NonFinite,
}

/// One broken invariant, located by date when a date is available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub date: Option<NaiveDate>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.date {
            Some(d) => write!(f, "{:?} at {d} (row {})", self.rule, self.index),
            None => write!(f, "{:?} (row {})", self.rule, self.index),
        }
    }
}

/// A daily series of one quantity; `None` marks a missing observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    id: String,
    units: Units,
    dates: Vec<NaiveDate>,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    /// Builds a series and checks every invariant.
    pub fn new(id: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<Option<f64>>) -> Result<Self> {
        let ts = Self::from_parts(id, dates, values);
        let violations = validate_series(&ts);
        if violations.is_empty() {
            Ok(ts)
        } else {
            Err(Error::InvalidSeries { id: ts.id, violations })
        }
    }

    /// Builds a complete series (no gaps).
    pub fn complete(id: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        Self::new(id, dates, values.into_iter().map(Some).collect())
    }

    /// Builds a series without validation. Use [`validate_series`] to inspect it.
    pub fn from_parts(id: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<Option<f64>>) -> Self {
        TimeSeries { id: id.into(), units: Units::Decimal, dates, values }
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Values of a complete series, or an error naming the first gap.
    pub fn complete_values(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|v| v.ok_or(Error::InsufficientData { what: "complete series", needed: self.len(), got: self.present_count() }))
            .collect()
    }

    pub fn present_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Sub-series with dates in `[start, end]`.
    pub fn window(&self, start: NaiveDate, end: NaiveDate) -> Result<TimeSeries> {
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d <= end);
        if lo >= hi {
            return Err(Error::EmptyWindow { start, end });
        }
        Ok(TimeSeries {
            id: self.id.clone(),
            units: self.units,
            dates: self.dates[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        })
    }

    /// Same dates and id, new values.
    pub fn with_values(&self, values: Vec<Option<f64>>) -> TimeSeries {
        debug_assert_eq!(values.len(), self.dates.len());
        TimeSeries { id: self.id.clone(), units: self.units, dates: self.dates.clone(), values }
    }

    pub fn value_on(&self, date: NaiveDate) -> Option<f64> {
        self.dates.binary_search(&date).ok().and_then(|i| self.values[i])
    }
}

/// Lists every broken invariant of `ts`; empty iff the series is valid.
pub fn validate_series(ts: &TimeSeries) -> Vec<Violation> {
    let mut out = Vec::new();
    if ts.dates.len() != ts.values.len() {
        out.push(Violation { index: ts.dates.len().min(ts.values.len()), date: None, rule: Rule::LengthMismatch });
    }
    out.extend(date_violations(&ts.dates));
    for (i, v) in ts.values.iter().enumerate() {
        if let Some(x) = v {
            if !x.is_finite() {
                out.push(Violation { index: i, date: ts.dates.get(i).copied(), rule: Rule::NonFinite });
            }
        }
    }
    out.sort_by_key(|v| v.index);
    out
}

pub(crate) fn date_violations(dates: &[NaiveDate]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, d) in dates.iter().enumerate() {
        if !is_business_day(*d) {
            out.push(Violation { index: i, date: Some(*d), rule: Rule::NonBusinessDay });
        }
        if i > 0 {
            let prev = dates[i - 1];
            if *d == prev {
                out.push(Violation { index: i, date: Some(*d), rule: Rule::DuplicateDate });
            } else if *d < prev {
                out.push(Violation { index: i, date: Some(*d), rule: Rule::DatesNotIncreasing });
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// `n` consecutive business days starting on Monday 2001-01-01.
    pub fn bdays(n: usize) -> Vec<NaiveDate> {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        start.iter_days().filter(|d| is_business_day(*d)).take(n).collect()
    }

    pub fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::complete("x", bdays(values.len()), values.to_vec()).unwrap()
    }
}
