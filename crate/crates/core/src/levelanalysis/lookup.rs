use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datamodel::DataModelSpec;
use crate::error::{Error, Result};
use crate::exec::try_map_range;
use crate::metrics::{svar_report, RiskConfig};
use crate::panel::InstrumentPanel;
use crate::state::MarketState;

pub const LOOKUP_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupCell {
    pub model: String,
    pub tenor: String,
    pub bucket_lo: f64,
    pub bucket_hi: f64,
    /// Level the shocks were applied at: the bucket midpoint.
    pub level: f64,
    pub var_lower: f64,
    pub var_upper: f64,
    pub es_lower: f64,
    pub es_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub data_hash: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupTable {
    pub schema_version: u32,
    pub window_id: String,
    pub window: (NaiveDate, NaiveDate),
    pub model_ids: Vec<String>,
    pub tenors: Vec<String>,
    pub level_buckets: Vec<(f64, f64)>,
    /// Model-major, then tenor, then bucket.
    pub cells: Vec<LookupCell>,
    pub provenance: Provenance,
}

pub struct LookupInput<'a> {
    /// Cleaned tenor-rate panel; one column per tenor point.
    pub panel: &'a InstrumentPanel,
    pub window_id: &'a str,
    pub window: (NaiveDate, NaiveDate),
    pub specs: &'a [DataModelSpec],
    pub buckets: &'a [(f64, f64)],
    /// Column ids of `panel` to tabulate.
    pub tenors: &'a [String],
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Window data as `date,<id>...` lines with shortest round-trip floats.
fn data_fingerprint(panel: &InstrumentPanel, cols: &[usize], window: (NaiveDate, NaiveDate)) -> String {
    let mut s = String::from("date");
    for &c in cols {
        s.push(',');
        s.push_str(&panel.instruments()[c].id());
    }
    s.push('\n');
    for (r, d) in panel.dates().iter().enumerate() {
        if *d < window.0 || *d > window.1 {
            continue;
        }
        s.push_str(&d.to_string());
        for &c in cols {
            s.push(',');
            if let Some(v) = panel.quote(r, c) {
                s.push_str(&v.to_string());
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct ConfigFingerprint<'a> {
    window_id: &'a str,
    window: (NaiveDate, NaiveDate),
    specs: &'a [DataModelSpec],
    buckets: &'a [(f64, f64)],
    tenors: &'a [String],
    alpha: f64,
    beta: f64,
    holding_days: usize,
    window_days: usize,
}

/// Fills every (model, tenor, bucket) cell with both-tail VAR and ES of the
/// stress-window shocks applied at the bucket midpoint.
pub fn build_lookup_table(input: &LookupInput, cfg: &RiskConfig) -> Result<LookupTable> {
    cfg.validate()?;
    if input.specs.is_empty() || input.tenors.is_empty() || input.buckets.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (lo, hi) in input.buckets {
        if !(lo < hi) {
            return Err(Error::config("buckets", format!("need lo < hi, got ({lo}, {hi})")));
        }
    }
    let cols: Vec<usize> = input
        .tenors
        .iter()
        .map(|id| {
            input
                .panel
                .instruments()
                .iter()
                .position(|i| i.id() == *id)
                .ok_or_else(|| Error::config("tenors", format!("no column {id}")))
        })
        .collect::<Result<_>>()?;
    let series: Vec<_> = cols.iter().map(|&c| input.panel.series(c)).collect();
    let (nt, nb) = (cols.len(), input.buckets.len());
    let cells = try_map_range(cfg.exec, input.specs.len() * nt * nb, |k| {
        let (s, t, b) = (k / (nt * nb), (k / nb) % nt, k % nb);
        let spec = &input.specs[s];
        let (lo, hi) = input.buckets[b];
        let level = 0.5 * (lo + hi);
        let cell = || -> Result<LookupCell> {
            let state = MarketState::new(input.window.1, level, input.window.0)?;
            let r = svar_report(&series[t], input.window, spec, state, cfg)?;
            Ok(LookupCell {
                model: spec.id(),
                tenor: input.tenors[t].clone(),
                bucket_lo: lo,
                bucket_hi: hi,
                level,
                var_lower: r.lower.var_value,
                var_upper: r.upper.var_value,
                es_lower: r.lower.es_value,
                es_upper: r.upper.es_value,
            })
        };
        cell().map_err(|e| Error::LookupCell { model: spec.id(), tenor: input.tenors[t].clone(), bucket: b, source: Box::new(e) })
    })?;
    let config = ConfigFingerprint {
        window_id: input.window_id,
        window: input.window,
        specs: input.specs,
        buckets: input.buckets,
        tenors: input.tenors,
        alpha: cfg.alpha,
        beta: cfg.beta,
        holding_days: cfg.holding_days,
        window_days: cfg.window_days,
    };
    let config_json = serde_json::to_string(&config).expect("config serializes");
    Ok(LookupTable {
        schema_version: LOOKUP_SCHEMA_VERSION,
        window_id: input.window_id.to_string(),
        window: input.window,
        model_ids: input.specs.iter().map(DataModelSpec::id).collect(),
        tenors: input.tenors.to_vec(),
        level_buckets: input.buckets.to_vec(),
        cells,
        provenance: Provenance {
            data_hash: sha256_hex(data_fingerprint(input.panel, &cols, input.window).as_bytes()),
            config_hash: sha256_hex(config_json.as_bytes()),
        },
    })
}

impl LookupTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            w.serialize(c).map_err(|e| Error::config("csv", e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::config("csv", e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn cell(&self, model: &str, tenor: &str, bucket: usize) -> Option<&LookupCell> {
        let (s, t) = (self.model_ids.iter().position(|m| m == model)?, self.tenors.iter().position(|x| x == tenor)?);
        let nb = self.level_buckets.len();
        self.cells.get((s * self.tenors.len() + t) * nb + bucket)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::panel::Instrument;
    use crate::series::testutil::bdays;

    fn panel() -> InstrumentPanel {
        let d = bdays(300);
        let ins = vec![Instrument::libor("2Y").unwrap(), Instrument::libor("10Y").unwrap()];
        let q = (0..300).map(|i| vec![Some(0.02 + 1e-4 * ((i * 17 % 23) as f64)), Some(0.03 + 1e-4 * ((i * 5 % 11) as f64))]).collect();
        InstrumentPanel::new(d, ins, q).unwrap()
    }

    #[test]
    fn relative_cells_are_homogeneous_and_reproducible() {
        let p = panel();
        let d = p.dates().to_vec();
        let specs = vec![DataModelSpec::relative(10).unwrap(), DataModelSpec::absolute(10).unwrap()];
        let tenors = vec!["IRS:2Y".to_string(), "IRS:10Y".to_string()];
        let buckets = vec![(0.01, 0.0125), (0.02, 0.025)];
        let input = LookupInput { panel: &p, window_id: "test", window: (d[0], d[299]), specs: &specs, buckets: &buckets, tenors: &tenors };
        let cfg = RiskConfig::default();
        let t = build_lookup_table(&input, &cfg).unwrap();
        assert_eq!(t.cells.len(), 8);
        let model = specs[0].id();
        for tenor in &tenors {
            let (a, b) = (t.cell(&model, tenor, 0).unwrap(), t.cell(&model, tenor, 1).unwrap());
            // midpoints 1.125% and 2.25%: exactly double
            assert_eq!(b.level, 2.0 * a.level);
            assert!((b.var_upper - 2.0 * a.var_upper).abs() <= 4.0 * f64::EPSILON * b.var_upper.abs());
            assert!((b.es_lower - 2.0 * a.es_lower).abs() <= 4.0 * f64::EPSILON * b.es_lower.abs());
        }
        let seq = build_lookup_table(&input, &RiskConfig { exec: Exec::Sequential, ..cfg }).unwrap();
        assert_eq!(t.to_json(), seq.to_json());
        assert_eq!(LookupTable::from_json(&t.to_json()).unwrap(), t);
        assert_eq!(t.provenance.data_hash.len(), 64);
    }

    #[test]
    fn failing_cell_is_named() {
        let p = panel();
        let d = p.dates().to_vec();
        let specs = vec![DataModelSpec::relative(10).unwrap()];
        let tenors = vec!["IRS:2Y".to_string()];
        let buckets = vec![(-0.00005, 0.00005)];
        let input = LookupInput { panel: &p, window_id: "w", window: (d[0], d[299]), specs: &specs, buckets: &buckets, tenors: &tenors };
        match build_lookup_table(&input, &RiskConfig::default()) {
            Err(Error::LookupCell { tenor, bucket, .. }) => assert_eq!((tenor.as_str(), bucket), ("IRS:2Y", 0)),
            other => panic!("{other:?}"),
        }
    }
}
