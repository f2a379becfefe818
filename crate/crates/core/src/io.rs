//! CSV input and output.
//!
//! Series files have the header `date,value`; panel files have
//! `date,<instrument-id>...`. Dates are ISO `YYYY-MM-DD`, values are
//! decimal rates and an empty cell means missing.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::panel::{Instrument, InstrumentPanel};
use crate::series::TimeSeries;

/// A parsed CSV keeping the original cell text, so unchanged cells can be
/// written back byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub dates: Vec<NaiveDate>,
    date_text: Vec<String>,
    cells: Vec<Vec<String>>,
    values: Vec<Vec<Option<f64>>>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

impl RawTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
        let mut records = rdr.records();
        let header: Vec<String> = match records.next() {
            None => return Err(Error::EmptyInput),
            Some(r) => r.map_err(|e| parse_err(1, 1, e.to_string()))?.iter().map(|s| s.trim().to_string()).collect(),
        };
        if header.first().map(String::as_str) != Some("date") {
            return Err(parse_err(1, 1, "first header cell must be `date`"));
        }
        if header.len() < 2 {
            return Err(parse_err(1, 2, "no value columns"));
        }
        let width = header.len();
        let mut t = RawTable { header, dates: vec![], date_text: vec![], cells: vec![], values: vec![] };
        for rec in records {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                parse_err(line, 1, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() == 1 && rec[0].trim().is_empty() {
                continue;
            }
            if rec.len() != width {
                return Err(parse_err(line, rec.len().min(width) + 1, format!("expected {width} cells, found {}", rec.len())));
            }
            let date = parse_date(&rec[0]).ok_or_else(|| parse_err(line, 1, format!("invalid date {:?}", &rec[0])))?;
            let mut row = Vec::with_capacity(width - 1);
            for (j, cell) in rec.iter().enumerate().skip(1) {
                let c = cell.trim();
                row.push(if c.is_empty() {
                    None
                } else {
                    let v: f64 = c.parse().map_err(|_| parse_err(line, j + 1, format!("invalid number {c:?}")))?;
                    if !v.is_finite() {
                        return Err(parse_err(line, j + 1, format!("non-finite value {c:?}")));
                    }
                    Some(v)
                });
            }
            t.dates.push(date);
            t.date_text.push(rec[0].to_string());
            t.cells.push(rec.iter().skip(1).map(str::to_string).collect());
            t.values.push(row);
        }
        if t.dates.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(t)
    }

    pub fn values(&self) -> &[Vec<Option<f64>>] {
        &self.values
    }

    pub fn to_panel(&self) -> Result<InstrumentPanel> {
        let instruments = self.header[1..]
            .iter()
            .enumerate()
            .map(|(j, id)| id.parse::<Instrument>().map_err(|e| parse_err(1, j + 2, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        InstrumentPanel::new(self.dates.clone(), instruments, self.values.clone())
    }

    pub fn to_series(&self, id: &str) -> Result<TimeSeries> {
        if self.header.len() != 2 || self.header[1] != "value" {
            return Err(parse_err(1, 2, "series files need the header `date,value`"));
        }
        TimeSeries::new(id, self.dates.clone(), self.values.iter().map(|r| r[0]).collect())
    }

    /// The table with `values` substituted; cells whose value is unchanged
    /// keep their original text.
    pub fn render(&self, values: &[Vec<Option<f64>>]) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for (r, row) in values.iter().enumerate() {
            out.push_str(&self.date_text[r]);
            for (j, v) in row.iter().enumerate() {
                out.push(',');
                let same = match (v, self.values[r][j]) {
                    (None, None) => true,
                    (Some(a), Some(b)) => a.to_bits() == b.to_bits(),
                    _ => false,
                };
                if same {
                    out.push_str(&self.cells[r][j]);
                } else if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn read_series_csv(text: &str, id: &str) -> Result<TimeSeries> {
    RawTable::parse(text)?.to_series(id)
}

pub fn read_panel_csv(text: &str) -> Result<InstrumentPanel> {
    RawTable::parse(text)?.to_panel()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_series_csv(ts: &TimeSeries) -> String {
    let mut out = String::from("date,value\n");
    for (d, v) in ts.dates().iter().zip(ts.values()) {
        out.push_str(&format!("{d},{}\n", cell(*v)));
    }
    out
}

pub fn write_panel_csv(panel: &InstrumentPanel) -> String {
    let mut out = String::from("date");
    for i in panel.instruments() {
        out.push(',');
        out.push_str(&i.id());
    }
    out.push('\n');
    for (d, row) in panel.dates().iter().zip(panel.rows()) {
        out.push_str(&d.to_string());
        for v in row {
            out.push(',');
            out.push_str(&cell(*v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_round_trip_keeps_text() {
        let text = "date,OIS:5Y,IRS:5Y\n2014-01-02,0.0200,\n2014-01-03,2.1e-2,0.025\n";
        let raw = RawTable::parse(text).unwrap();
        let p = raw.to_panel().unwrap();
        assert_eq!(p.quote(0, 0), Some(0.02));
        assert_eq!(p.quote(0, 1), None);
        assert_eq!(raw.render(p.rows()), text);
        let mut v = p.rows().to_vec();
        v[0][1] = Some(0.03);
        assert_eq!(raw.render(&v), "date,OIS:5Y,IRS:5Y\n2014-01-02,0.0200,0.03\n2014-01-03,2.1e-2,0.025\n");
        assert_eq!(read_panel_csv(&write_panel_csv(&p)).unwrap(), p);
    }

    #[test]
    fn errors_name_line_and_column() {
        let e = read_panel_csv("date,IRS:5Y\n2014-01-02,0.02\n2014-13-02,0.02\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, column: 1, .. }), "{e:?}");
        let e = read_panel_csv("date,IRS:5Y\n2014-01-02,abc\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 2, .. }), "{e:?}");
        let e = read_panel_csv("date,XYZ\n2014-01-02,0.1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 2, .. }), "{e:?}");
        assert!(matches!(read_panel_csv(""), Err(Error::EmptyInput)));
        assert!(matches!(read_panel_csv("date,IRS:5Y\n"), Err(Error::EmptyInput)));
    }

    #[test]
    fn series_round_trip() {
        let text = "date,value\n2014-01-02,0.01\n2014-01-03,\n";
        let ts = read_series_csv(text, "eff").unwrap();
        assert_eq!(ts.values(), &[Some(0.01), None]);
        assert_eq!(write_series_csv(&ts), text);
        assert!(read_series_csv("date,x\n2014-01-02,1\n", "a").is_err());
    }
}
