//! Date × instrument quote matrices.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{date_violations, TimeSeries};

/// Instrument maturity, held in whole months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tenor(u32);

impl Tenor {
    pub fn months(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPanel("tenor must be strictly positive".into()));
        }
        Ok(Tenor(m))
    }

    pub fn years(y: u32) -> Result<Self> {
        Self::months(y * 12)
    }

    pub fn in_months(self) -> u32 {
        self.0
    }

    /// Year fraction.
    pub fn year_fraction(self) -> f64 {
        self.0 as f64 / 12.0
    }
}

impl fmt::Display for Tenor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(12) {
            write!(f, "{}Y", self.0 / 12)
        } else {
            write!(f, "{}M", self.0)
        }
    }
}

impl FromStr for Tenor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidPanel(format!("bad tenor `{s}`"));
        if s.len() < 2 {
            return Err(bad());
        }
        let (num, unit) = s.split_at(s.len() - 1);
        let n: u32 = num.parse().map_err(|_| bad())?;
        match unit {
            "M" | "m" => Tenor::months(n),
            "Y" | "y" => Tenor::years(n),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstrumentKind {
    OisSwap,
    Deposit,
    LiborSwap,
    Cds { name: String },
}

/// Curve families interpolated together across tenor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveFamily {
    Ois,
    Libor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instrument {
    pub kind: InstrumentKind,
    pub tenor: Tenor,
}

/// CDS quotes are conventionally 5Y.
const CDS_TENOR_MONTHS: u32 = 60;

impl Instrument {
    pub fn new(kind: InstrumentKind, tenor: Tenor) -> Self {
        Instrument { kind, tenor }
    }

    pub fn ois(tenor: &str) -> Result<Self> {
        Ok(Self::new(InstrumentKind::OisSwap, tenor.parse()?))
    }

    pub fn deposit(tenor: &str) -> Result<Self> {
        Ok(Self::new(InstrumentKind::Deposit, tenor.parse()?))
    }

    pub fn libor(tenor: &str) -> Result<Self> {
        Ok(Self::new(InstrumentKind::LiborSwap, tenor.parse()?))
    }

    pub fn cds(name: &str) -> Self {
        Self::new(InstrumentKind::Cds { name: name.to_string() }, Tenor(CDS_TENOR_MONTHS))
    }

    pub fn year_fraction(&self) -> f64 {
        self.tenor.year_fraction()
    }

    pub fn family(&self) -> Option<CurveFamily> {
        match self.kind {
            InstrumentKind::OisSwap => Some(CurveFamily::Ois),
            InstrumentKind::Deposit | InstrumentKind::LiborSwap => Some(CurveFamily::Libor),
            InstrumentKind::Cds { .. } => None,
        }
    }

    /// Canonical id: `OIS:5Y`, `DEPO:3M`, `IRS:10Y` or `CDS:<name>`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Instrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            InstrumentKind::OisSwap => write!(f, "OIS:{}", self.tenor),
            InstrumentKind::Deposit => write!(f, "DEPO:{}", self.tenor),
            InstrumentKind::LiborSwap => write!(f, "IRS:{}", self.tenor),
            InstrumentKind::Cds { name } => write!(f, "CDS:{name}"),
        }
    }
}

impl FromStr for Instrument {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidPanel(format!("instrument id `{s}` lacks a `KIND:` prefix")))?;
        match kind {
            "OIS" => Instrument::ois(rest),
            "DEPO" => Instrument::deposit(rest),
            "IRS" => Instrument::libor(rest),
            "CDS" if !rest.is_empty() => Ok(Instrument::cds(rest)),
            _ => Err(Error::InvalidPanel(format!("unknown instrument id `{s}`"))),
        }
    }
}

/// Quotes per (date, instrument); rows are dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentPanel {
    dates: Vec<NaiveDate>,
    instruments: Vec<Instrument>,
    quotes: Vec<Vec<Option<f64>>>,
}

impl InstrumentPanel {
    pub fn new(dates: Vec<NaiveDate>, instruments: Vec<Instrument>, quotes: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if let Some(v) = date_violations(&dates).first() {
            return Err(Error::InvalidPanel(v.to_string()));
        }
        let mut seen = HashSet::new();
        for ins in &instruments {
            if !seen.insert(ins) {
                return Err(Error::InvalidPanel(format!("duplicate instrument {ins}")));
            }
        }
        if quotes.len() != dates.len() {
            return Err(Error::InvalidPanel(format!("{} rows for {} dates", quotes.len(), dates.len())));
        }
        for (row, d) in quotes.iter().zip(&dates) {
            if row.len() != instruments.len() {
                return Err(Error::InvalidPanel(format!(
                    "row {d} has {} quotes for {} instruments",
                    row.len(),
                    instruments.len()
                )));
            }
            if row.iter().flatten().any(|q| !q.is_finite()) {
                return Err(Error::InvalidPanel(format!("non-finite quote on {d}")));
            }
        }
        Ok(InstrumentPanel { dates, instruments, quotes })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn instruments(&self) -> &[Instrument] {
        &self.instruments
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.quotes
    }

    pub fn quote(&self, row: usize, col: usize) -> Option<f64> {
        self.quotes[row][col]
    }

    pub fn column_index(&self, ins: &Instrument) -> Option<usize> {
        self.instruments.iter().position(|i| i == ins)
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        self.quotes.iter().map(|r| r[col]).collect()
    }

    /// One instrument as a series.
    pub fn series(&self, col: usize) -> TimeSeries {
        TimeSeries::from_parts(self.instruments[col].id(), self.dates.clone(), self.column(col))
    }

    pub fn row_index(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Replaces quotes, keeping dates and instruments.
    pub(crate) fn with_quotes(&self, quotes: Vec<Vec<Option<f64>>>) -> InstrumentPanel {
        InstrumentPanel { dates: self.dates.clone(), instruments: self.instruments.clone(), quotes }
    }

    pub fn set_column(&mut self, col: usize, values: &[Option<f64>]) {
        for (row, v) in self.quotes.iter_mut().zip(values) {
            row[col] = *v;
        }
    }
}

/// Restricts `panel` to dates in `[start, end]`, keeping instrument order.
pub fn business_day_window(panel: &InstrumentPanel, start: NaiveDate, end: NaiveDate) -> Result<InstrumentPanel> {
    if start > end {
        return Err(Error::EmptyWindow { start, end });
    }
    let lo = panel.dates.partition_point(|d| *d < start);
    let hi = panel.dates.partition_point(|d| *d <= end);
    if lo >= hi {
        return Err(Error::EmptyWindow { start, end });
    }
    Ok(InstrumentPanel {
        dates: panel.dates[lo..hi].to_vec(),
        instruments: panel.instruments.clone(),
        quotes: panel.quotes[lo..hi].to_vec(),
    })
}
