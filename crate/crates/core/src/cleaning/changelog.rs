use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::InstrumentPanel;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Interpolated,
    TimeFilled,
    ExtrapolatedFlat,
    ExtrapolatedConstantSpread,
    OutlierReplaced,
    SpikeRemoved,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Interpolated => "interpolated",
            Action::TimeFilled => "time-filled",
            Action::ExtrapolatedFlat => "extrapolated-flat",
            Action::ExtrapolatedConstantSpread => "extrapolated-constant-spread",
            Action::OutlierReplaced => "outlier-replaced",
            Action::SpikeRemoved => "spike-removed",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "interpolated" => Action::Interpolated,
            "time-filled" => Action::TimeFilled,
            "extrapolated-flat" => Action::ExtrapolatedFlat,
            "extrapolated-constant-spread" => Action::ExtrapolatedConstantSpread,
            "outlier-replaced" => Action::OutlierReplaced,
            "spike-removed" => Action::SpikeRemoved,
            _ => return Err(Error::config("action", format!("unknown action `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Change {
    pub date: NaiveDate,
    pub id: String,
    pub action: Action,
    pub old: Option<f64>,
    pub new: f64,
}

/// Every alteration made by cleaning, ordered by date.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChangeLog {
    entries: Vec<Change>,
}

impl ChangeLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Change] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, date: NaiveDate, id: &str, action: Action, old: Option<f64>, new: f64) {
        self.entries.push(Change { date, id: id.to_string(), action, old, new });
    }

    /// Appends `other` and restores date order. Entries on the same date
    /// keep their relative order, so later stages are applied later.
    pub fn append(&mut self, other: ChangeLog) {
        self.entries.extend(other.entries);
        self.entries.sort_by_key(|c| c.date);
    }

    pub(crate) fn sort(&mut self) {
        self.entries.sort_by_key(|c| c.date);
    }

    /// Replays entries matching the series id.
    pub fn apply_to_series(&self, ts: &TimeSeries) -> TimeSeries {
        let mut values = ts.values().to_vec();
        for c in self.entries.iter().filter(|c| c.id == ts.id()) {
            if let Ok(i) = ts.dates().binary_search(&c.date) {
                values[i] = Some(c.new);
            }
        }
        ts.with_values(values)
    }

    pub fn apply_to_panel(&self, panel: &InstrumentPanel) -> Result<InstrumentPanel> {
        let ids: Vec<String> = panel.instruments().iter().map(|i| i.id()).collect();
        let mut rows = panel.rows().to_vec();
        for c in &self.entries {
            let col = ids
                .iter()
                .position(|id| *id == c.id)
                .ok_or_else(|| Error::InvalidPanel(format!("change log names unknown instrument `{}`", c.id)))?;
            let row = panel
                .row_index(c.date)
                .ok_or_else(|| Error::InvalidPanel(format!("change log names unknown date {}", c.date)))?;
            rows[row][col] = Some(c.new);
        }
        Ok(panel.with_quotes(rows))
    }

    /// CSV with header `date,id,action,old,new`; `old` is empty when the
    /// value was missing.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Parse { line: 0, column: 0, message: e.to_string() };
        out.write_record(["date", "id", "action", "old", "new"]).map_err(io)?;
        for c in &self.entries {
            let old = c.old.map(|v| v.to_string()).unwrap_or_default();
            out.write_record([c.date.to_string(), c.id.clone(), c.action.to_string(), old, c.new.to_string()])
                .map_err(io)?;
        }
        out.flush().map_err(|e| Error::Parse { line: 0, column: 0, message: e.to_string() })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut log = ChangeLog::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse { line, column: 0, message: e.to_string() })?;
            let field = |k: usize| rec.get(k).ok_or(Error::Parse { line, column: k + 1, message: "missing field".into() });
            let perr = |k: usize, m: String| Error::Parse { line, column: k + 1, message: m };
            let date = NaiveDate::parse_from_str(field(0)?, "%Y-%m-%d").map_err(|e| perr(0, e.to_string()))?;
            let action: Action = field(2)?.parse().map_err(|e: Error| perr(2, e.to_string()))?;
            let old = match field(3)? {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| perr(3, e.to_string()))?),
            };
            let new = field(4)?.parse::<f64>().map_err(|e| perr(4, e.to_string()))?;
            log.push(date, field(1)?, action, old, new);
        }
        Ok(log)
    }
}
