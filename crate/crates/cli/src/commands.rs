use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;
use tailrisk::cleaning::{clean_panel, clean_series, CleaningConfig, DetectionOutcome};
use tailrisk::curve::{bootstrap_row, Direction, Regime, SWAP_TENORS};
use tailrisk::datamodel::{Coeffs, DataModelSpec, Extrapolation, LevelFunction, ModelKind};
use tailrisk::exec::Exec;
use tailrisk::gapscan::{gap_report, gap_track_csv, percentile_track};
use tailrisk::io::{write_series_csv, RawTable};
use tailrisk::levelanalysis::{
    bucket_sd, build_lookup_table, fit_level_function, make_level_function, FitResult, FitTarget, LevelBucket,
    LookupInput, Weighting, DEFAULT_MAX_LEVEL,
};
use tailrisk::metrics::{
    capital_charge, rolling_clean_sensitivity, svar_report, swap_svar, tenor_history, CapitalMode, RiskConfig,
    SvarReport, SwapSvarInput,
};
use tailrisk::panel::{business_day_window, InstrumentKind, InstrumentPanel};
use tailrisk::series::TimeSeries;
use tailrisk::state::MarketState;

use crate::error::CliError;
use crate::output::{read_text, to_csv, Echo, Outputs};
use crate::settings::Settings;

fn exec(s: &Settings) -> Result<Exec, CliError> {
    match s.required("exec")? {
        "parallel" => Ok(Exec::Parallel),
        "sequential" => Ok(Exec::Sequential),
        v => Err(CliError::config("exec", format!("expected parallel or sequential, got {v:?}"))),
    }
}

fn cleaning_config(s: &Settings) -> Result<CleaningConfig, CliError> {
    let seed = s
        .raw("seed")
        .ok_or_else(|| CliError::config("seed", "is required: randomized steps never fall back to a default seed"))?;
    let seed: u64 = seed.parse().map_err(|e| CliError::config("seed", format!("invalid value {seed:?}: {e}")))?;
    let cfg = CleaningConfig {
        trim_fraction: s.get("trim_fraction")?,
        mc_trials: s.get("mc_trials")?,
        threshold_sds: s.get("threshold_sds")?,
        max_time_gap_days: s.get("max_time_gap_days")?,
        spike_max_width_days: s.get("spike_max_width_days")?,
        spike_return_tolerance: s.get("spike_return_tolerance")?,
        rng_seed: seed,
        exec: exec(s)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn risk_config(s: &Settings) -> Result<RiskConfig, CliError> {
    let cfg = RiskConfig {
        alpha: s.get("alpha")?,
        beta: s.get("beta")?,
        holding_days: s.get("holding_days")?,
        window_days: s.get("window_days")?,
        exec: exec(s)?,
        ..RiskConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load(s: &Settings, out: &mut Outputs) -> Result<RawTable, CliError> {
    let path = Path::new(s.required("input")?);
    let text = read_text(path)?;
    out.input("input", text.as_bytes());
    Ok(RawTable::parse(&text)?)
}

fn outputs(s: &Settings, command: &'static str) -> Result<Outputs, CliError> {
    Outputs::create(Path::new(s.required("out")?), command)
}

fn is_series(raw: &RawTable) -> bool {
    raw.header.len() == 2 && raw.header[1] == "value"
}

/// The series file itself, or one column of a panel.
fn single_series(s: &Settings, raw: &RawTable) -> Result<TimeSeries, CliError> {
    if is_series(raw) {
        return Ok(raw.to_series("value")?);
    }
    let panel = raw.to_panel()?;
    let ids: Vec<String> = panel.instruments().iter().map(|i| i.id()).collect();
    let col = match s.raw("column") {
        Some(c) => ids.iter().position(|i| i == c).ok_or_else(|| CliError::config("column", format!("no column {c:?}")))?,
        None if ids.len() == 1 => 0,
        None => return Err(CliError::config("column", "is required for a panel with several columns")),
    };
    Ok(panel.series(col))
}

fn level_function(s: &Settings, out: &mut Outputs) -> Result<Option<LevelFunction>, CliError> {
    let Some(v) = s.raw("level_fn") else { return Ok(None) };
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() == 3 {
        if let Ok(c) = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<Vec<f64>, _>>() {
            let degree = if c[2] == 0.0 { 1 } else { 2 };
            return Ok(Some(LevelFunction::new(degree, Coeffs { a: c[0], b: c[1], c: c[2] }, (0.0, DEFAULT_MAX_LEVEL))?));
        }
    }
    let text = read_text(Path::new(v))?;
    out.input("level_fn", text.as_bytes());
    let json: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::config("level_fn", format!("{v}: {e}")))?;
    let body = json.get("level_function").cloned().unwrap_or(json);
    serde_json::from_value(body).map(Some).map_err(|e| CliError::config("level_fn", format!("{v}: {e}")))
}

fn specs(s: &Settings, key: &'static str, out: &mut Outputs) -> Result<Vec<DataModelSpec>, CliError> {
    let holding: usize = s.get("holding_days")?;
    let f = level_function(s, out)?;
    s.list::<ModelKind>(key)?
        .into_iter()
        .map(|k| match k {
            ModelKind::LevelRelative => {
                let f = f.clone().ok_or_else(|| CliError::config("level_fn", "is required for level-relative"))?;
                Ok(DataModelSpec::level_relative(holding, f)?)
            }
            _ => Ok(DataModelSpec::new(k, holding, None)?),
        })
        .collect()
}

#[derive(Serialize)]
struct DetectionRow<'a> {
    id: &'a str,
    #[serde(flatten)]
    outcome: &'a DetectionOutcome,
}

#[derive(Serialize)]
struct CleanSummary<'a> {
    #[serde(flatten)]
    echo: Echo,
    changes: usize,
    detections: Vec<DetectionRow<'a>>,
    all_missing: &'a [String],
}

pub fn clean(s: &Settings) -> Result<(), CliError> {
    let cfg = cleaning_config(s)?;
    let spikes = s.flag("spikes")?;
    let mut out = outputs(s, "clean")?;
    let raw = load(s, &mut out)?;
    let (values, log, detections, all_missing) = if is_series(&raw) {
        let r = clean_series(&raw.to_series("value")?, &cfg, spikes)?;
        let values: Vec<Vec<Option<f64>>> = r.series.values().iter().map(|v| vec![*v]).collect();
        (values, r.log, vec![("value".to_string(), r.detection)], vec![])
    } else {
        let r = clean_panel(&raw.to_panel()?, &cfg, spikes)?;
        (r.panel.rows().to_vec(), r.log, r.detections, r.all_missing)
    };
    out.write("cleaned.csv", &raw.render(&values))?;
    out.write("changelog.csv", &log.to_csv_string())?;
    let summary = CleanSummary {
        echo: out.echo(s),
        changes: log.len(),
        detections: detections.iter().map(|(id, o)| DetectionRow { id, outcome: o }).collect(),
        all_missing: &all_missing,
    };
    out.write_json("detections.json", &summary)?;
    out.finish(s)
}

#[derive(Serialize)]
struct VarRow {
    window_id: String,
    window_start: NaiveDate,
    window_end: NaiveDate,
    as_of: NaiveDate,
    maturity: Option<f64>,
    model: String,
    svar_lower: f64,
    svar_upper: f64,
    es_lower: f64,
    es_upper: f64,
    tail_count: f64,
    var_loss: f64,
    svar_loss: f64,
    capital_mode: &'static str,
    capital: f64,
}

#[derive(Serialize)]
struct VarReport<'a> {
    #[serde(flatten)]
    echo: Echo,
    rows: &'a [VarRow],
}

fn parse_direction(s: &Settings) -> Result<Direction, CliError> {
    match s.required("direction")? {
        "payer" => Ok(Direction::Payer),
        "receiver" => Ok(Direction::Receiver),
        v => Err(CliError::config("direction", format!("expected payer or receiver, got {v:?}"))),
    }
}

/// Trailing window of `len` panel dates ending at row `row`.
fn trailing(dates: &[NaiveDate], row: usize, len: usize) -> Result<(NaiveDate, NaiveDate), CliError> {
    if row + 1 < len {
        return Err(tailrisk::Error::InsufficientData { what: "dates up to as_of for the current window", needed: len, got: row + 1 }.into());
    }
    Ok((dates[row + 1 - len], dates[row]))
}

fn as_of_row(s: &Settings, dates: &[NaiveDate]) -> Result<(NaiveDate, usize), CliError> {
    let as_of = s.date("as_of")?.unwrap_or(dates[dates.len() - 1]);
    let row = dates.binary_search(&as_of).map_err(|_| CliError::config("as_of", format!("{as_of} is not an input date")))?;
    Ok((as_of, row))
}

pub fn var(s: &Settings) -> Result<(), CliError> {
    let ccfg = cleaning_config(s)?;
    let rcfg = risk_config(s)?;
    let spikes = s.flag("spikes")?;
    let mode: CapitalMode = s.get("capital_mode")?;
    let mode_name = match mode {
        CapitalMode::Sum => "sum",
        CapitalMode::TwoMax => "two-max",
    };
    let stress = s.date_range("stress_window")?.ok_or_else(|| CliError::config("stress_window", "is required"))?;
    let window_id = s.required("window_id")?.to_string();
    let mut out = outputs(s, "var")?;
    let raw = load(s, &mut out)?;
    let specs = specs(s, "model", &mut out)?;
    let cur_len = rcfg.window_days + rcfg.holding_days;
    // (maturity, model index, stress report, current report)
    let mut results: Vec<(Option<f64>, usize, SvarReport, SvarReport)> = Vec::new();
    let as_of;
    if is_series(&raw) {
        let ts = clean_series(&raw.to_series("value")?, &ccfg, spikes)?.series;
        let (d, row) = as_of_row(s, ts.dates())?;
        as_of = d;
        let level = ts.values()[row].ok_or_else(|| CliError::config("as_of", format!("no value on {as_of}")))?;
        let current = trailing(ts.dates(), row, cur_len)?;
        let state = MarketState::new(as_of, level, current.0)?;
        for (i, spec) in specs.iter().enumerate() {
            let st = svar_report(&ts, stress, spec, state, &rcfg)?;
            let cur = svar_report(&ts, current, spec, state, &rcfg)?;
            results.push((None, i, st, cur));
        }
    } else {
        let panel = clean_panel(&raw.to_panel()?, &ccfg, spikes)?.panel;
        let regime = match s.required("regime")? {
            "auto" if panel.instruments().iter().any(|i| i.kind == InstrumentKind::OisSwap) => Regime::MultiCurve,
            "auto" => Regime::SingleCurve,
            _ => s.get::<Regime>("regime")?,
        };
        let maturities: Vec<f64> = s.list("maturities")?;
        let direction = parse_direction(s)?;
        let (d, row) = as_of_row(s, panel.dates())?;
        as_of = d;
        let base = bootstrap_row(&panel, row, regime)?;
        let tenors: Vec<f64> = SWAP_TENORS.iter().copied().filter(|t| *t <= base.max_tenor()).collect();
        let current = trailing(panel.dates(), row, cur_len)?;
        let h_stress = tenor_history(&business_day_window(&panel, stress.0, stress.1)?, regime, &tenors, rcfg.exec)?;
        let h_cur = tenor_history(&business_day_window(&panel, current.0, current.1)?, regime, &tenors, rcfg.exec)?;
        for (i, spec) in specs.iter().enumerate() {
            let run = |h| swap_svar(&SwapSvarInput { history: h, base: &base, spec, maturities: &maturities, direction }, &rcfg);
            let st = run(&h_stress)?;
            let cur = run(&h_cur)?;
            for ((m, a), (_, b)) in st.into_iter().zip(cur) {
                results.push((Some(m), i, a, b));
            }
        }
    }
    results.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
    let rows: Vec<VarRow> = results
        .into_iter()
        .map(|(maturity, _, st, cur)| {
            let var_loss = cur.losses().var_value.max(0.0);
            let svar_loss = st.losses().var_value.max(0.0);
            Ok(VarRow {
                window_id: window_id.clone(),
                window_start: st.lower.window.0,
                window_end: st.lower.window.1,
                as_of,
                maturity,
                model: st.lower.model_id.clone(),
                svar_lower: st.lower.var_value,
                svar_upper: st.upper.var_value,
                es_lower: st.lower.es_value,
                es_upper: st.upper.es_value,
                tail_count: st.upper.tail_count,
                var_loss,
                svar_loss,
                capital_mode: mode_name,
                capital: capital_charge(var_loss, svar_loss, mode)?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    out.write("report.csv", &to_csv(&rows)?)?;
    out.write_json("report.json", &VarReport { echo: out.echo(s), rows: &rows })?;
    out.finish(s)
}

#[derive(Serialize)]
struct FitReport<'a> {
    #[serde(flatten)]
    echo: Echo,
    fit: Option<&'a FitResult>,
    fit_error: Option<String>,
    level_function: Option<LevelFunction>,
    level_function_error: Option<String>,
}

#[derive(Serialize)]
struct PlotRow {
    series: &'static str,
    level: f64,
    sd: f64,
}

fn parse_choice<T: Copy>(s: &Settings, key: &'static str, options: &[(&str, T)]) -> Result<T, CliError> {
    let v = s.required(key)?;
    options.iter().find(|(n, _)| *n == v).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        CliError::config(key, format!("expected one of {}, got {v:?}", names.join(", ")))
    })
}

pub fn analyze_level(s: &Settings) -> Result<(), CliError> {
    let m: usize = s.get("holding_days")?;
    let bucket_bp: f64 = s.get("bucket_bp")?;
    let min_count: usize = s.get("min_count")?;
    let degree: u8 = s.get("degree")?;
    let extrapolation = parse_choice(s, "extrapolate", &[("flat", Extrapolation::Flat), ("poly", Extrapolation::Polynomial)])?;
    let target = parse_choice(s, "target", &[("relative", FitTarget::Relative), ("absolute", FitTarget::Absolute)])?;
    let weighting = parse_choice(s, "weighting", &[("unweighted", Weighting::Unweighted), ("count", Weighting::ByCount)])?;
    let max_level: f64 = s.get("max_level")?;
    let boundary: Option<f64> = s.opt("boundary")?;
    let mut out = outputs(s, "analyze-level")?;
    let raw = load(s, &mut out)?;
    let ts = single_series(s, &raw)?;
    let buckets = bucket_sd(&ts, m, bucket_bp, min_count)?;
    out.write("buckets.csv", &to_csv(&buckets)?)?;
    // too few populated buckets is a finding, not a failure
    let (fit, fit_error) = match fit_level_function(&buckets, degree, weighting, target) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (level_function, level_function_error) =
        match fit.as_ref().map(|f| make_level_function(f, extrapolation, boundary.unwrap_or(f.domain.1), max_level)) {
            Some(Ok(f)) => (Some(f), None),
            Some(Err(e)) => (None, Some(e.to_string())),
            None => (None, None),
        };
    let observed = |b: &LevelBucket| match target {
        FitTarget::Relative => b.sd_relative,
        FitTarget::Absolute => Some(b.sd_absolute),
    };
    let mut plot: Vec<PlotRow> = buckets
        .iter()
        .filter(|b| !b.thin)
        .filter_map(|b| observed(b).map(|sd| PlotRow { series: "observed", level: b.median_level, sd }))
        .collect();
    if let Some(fit) = &fit {
        let step = bucket_bp * 1e-4;
        let points = (max_level / step).round() as usize;
        plot.extend((0..=points).map(|i| {
            let l = i as f64 * step;
            let sd = level_function.as_ref().map_or_else(|| fit.coeffs.eval(l), |f| f.value(l));
            PlotRow { series: "fitted", level: l, sd }
        }));
    }
    out.write("plot.csv", &to_csv(&plot)?)?;
    let report = FitReport { echo: out.echo(s), fit: fit.as_ref(), fit_error, level_function, level_function_error };
    out.write_json("fit.json", &report)?;
    out.finish(s)
}

fn level_buckets(s: &Settings) -> Result<Vec<(f64, f64)>, CliError> {
    let (lo, hi) = s.range("levels")?;
    let bp: f64 = s.get("bucket_bp")?;
    if !(bp > 0.0) {
        return Err(CliError::config("bucket_bp", "must be positive"));
    }
    let w = bp * 1e-4;
    let n = ((hi - lo) / w).round().max(1.0) as usize;
    Ok((0..n).map(|i| (lo + i as f64 * w, lo + (i + 1) as f64 * w)).collect())
}

pub fn lookup(s: &Settings) -> Result<(), CliError> {
    let ccfg = cleaning_config(s)?;
    let rcfg = risk_config(s)?;
    let spikes = s.flag("spikes")?;
    let window = s.date_range("stress_window")?.ok_or_else(|| CliError::config("stress_window", "is required"))?;
    let window_id = s.required("window_id")?.to_string();
    let buckets = level_buckets(s)?;
    let mut out = outputs(s, "lookup")?;
    let raw = load(s, &mut out)?;
    let specs = specs(s, "models", &mut out)?;
    let panel: InstrumentPanel = clean_panel(&raw.to_panel()?, &ccfg, spikes)?.panel;
    let tenors: Vec<String> = match s.raw("tenors") {
        Some(_) => s.list("tenors")?,
        None => panel.instruments().iter().filter(|i| i.family().is_some()).map(|i| i.id()).collect(),
    };
    let input = LookupInput { panel: &panel, window_id: &window_id, window, specs: &specs, buckets: &buckets, tenors: &tenors };
    let table = build_lookup_table(&input, &rcfg)?;
    let mut json = table.to_json();
    json.push('\n');
    out.write("lookup.json", &json)?;
    out.write("lookup.csv", &table.to_csv()?)?;
    out.finish(s)
}

#[derive(Serialize)]
struct GapOutput<'a> {
    #[serde(flatten)]
    echo: Echo,
    as_of: NaiveDate,
    window: (NaiveDate, NaiveDate),
    k: usize,
    span: usize,
    report: &'a tailrisk::gapscan::GapReport,
}

pub fn gapscan(s: &Settings) -> Result<(), CliError> {
    let k: usize = s.get("k")?;
    let span: usize = s.get("span")?;
    let qs: Vec<f64> = s.list("percentiles")?;
    let exec = exec(s)?;
    let mut out = outputs(s, "gapscan")?;
    let raw = load(s, &mut out)?;
    let panel = raw.to_panel()?;
    let dates = panel.dates();
    let as_of = s.date("as_of")?.unwrap_or(dates[dates.len() - 1]);
    let window = s.date_range("window")?.unwrap_or((dates[0], dates[dates.len() - 1]));
    let report = gap_report(&panel, as_of, window, k, span, exec)?;
    out.write("gap_track.csv", &gap_track_csv(&report.pct_with_k_gaps_in_span))?;
    for q in qs {
        out.write(&format!("percentile_{q}.csv"), &write_series_csv(&percentile_track(&panel, q)?))?;
    }
    out.write_json("gap_report.json", &GapOutput { echo: out.echo(s), as_of, window, k, span, report: &report })?;
    out.finish(s)
}

#[derive(Serialize)]
struct SensitivitySummary {
    #[serde(flatten)]
    echo: Echo,
    windows: usize,
    flagged: usize,
    es_only: usize,
    changed: usize,
}

pub fn sensitivity(s: &Settings) -> Result<(), CliError> {
    let ccfg = cleaning_config(s)?;
    let rcfg = risk_config(s)?;
    let mut out = outputs(s, "sensitivity")?;
    let raw = load(s, &mut out)?;
    let ts = single_series(s, &raw)?;
    let points = rolling_clean_sensitivity(&ts, &ccfg, &rcfg)?;
    out.write("sensitivity.csv", &to_csv(&points)?)?;
    let summary = SensitivitySummary {
        echo: out.echo(s),
        windows: points.len(),
        flagged: points.iter().filter(|p| p.flagged).count(),
        es_only: points.iter().filter(|p| p.es_only && p.es_change > 0.0).count(),
        changed: points.iter().filter(|p| p.var_change > 0.0 || p.es_change > 0.0).count(),
    };
    out.write_json("summary.json", &summary)?;
    out.finish(s)
}
