mod common;

use std::fs;
use std::path::Path;

use common::*;
use tailrisk::cleaning::{clean_panel, clean_series, CleaningConfig};
use tailrisk::gapscan::gap_report;
use tailrisk::io::{read_panel_csv, read_series_csv};
use tailrisk::levelanalysis::{bucket_sd, build_lookup_table, LookupInput, LookupTable};
use tailrisk::datamodel::DataModelSpec;
use tailrisk::exec::Exec;
use tailrisk::metrics::{capital_charge, rolling_clean_sensitivity, svar_report, CapitalMode, RiskConfig};
use tailrisk::state::MarketState;

const STRESS: &str = "2007-06-01:2008-06-30";

fn series_file(dir: &Path, n: usize, seed: u64) -> (String, Vec<f64>) {
    let v = walk(n, seed, 0.04, 0.0002);
    let text = series_csv(&bdays(start(), n), &v.iter().map(|x| Some(*x)).collect::<Vec<_>>());
    (write(dir, "series.csv", &text).display().to_string(), v)
}

fn ok(o: &std::process::Output) {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn clean_input_passes_through_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let text = curve_panel_csv(300, 1);
    let input = write(dir.path(), "panel.csv", &text);
    let out = dir.path().join("out");
    ok(&run(&["clean", "-i", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--seed", "11"]));
    assert_eq!(fs::read_to_string(out.join("cleaned.csv")).unwrap(), text);
    assert_eq!(fs::read_to_string(out.join("changelog.csv")).unwrap(), "date,id,action,old,new\n");
}

#[test]
fn injected_spikes_are_logged_at_their_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let dates = bdays(start(), 600);
    let mut v: Vec<Option<f64>> = walk(600, 2, 0.04, 0.0001).into_iter().map(Some).collect();
    for i in [150, 420] {
        v[i] = v[i].map(|x| x + 20.0 * 0.0001);
    }
    let input = write(dir.path(), "s.csv", &series_csv(&dates, &v));
    let out = dir.path().join("out");
    ok(&run(&["clean", "-i", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--seed", "3"]));
    let rows = csv_rows(&out.join("changelog.csv"));
    let coords: Vec<(String, String)> = rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    assert_eq!(coords, vec![(dates[150].to_string(), "value".into()), (dates[420].to_string(), "value".into())]);
    let cleaned = fs::read_to_string(out.join("cleaned.csv")).unwrap();
    let original = fs::read_to_string(&input).unwrap();
    let differing = cleaned.lines().zip(original.lines()).filter(|(a, b)| a != b).count();
    assert_eq!(differing, 2);
}

#[test]
fn malformed_date_names_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "date,IRS:5Y\n2014-01-02,0.02\n2014-02-30,0.02\n");
    let o = run(&["clean", "-i", input.to_str().unwrap(), "-o", dir.path().join("o").to_str().unwrap(), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!((e["error"]["line"].as_u64(), e["error"]["column"].as_u64()), (Some(3), Some(1)));
    assert_eq!(e["schema_version"], 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = series_file(dir.path(), 400, 4);
    let out = dir.path().join("o");
    let o = run(&["clean", "-i", &input, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["field"], "seed");
    let o = run(&["clean", "-i", "/nonexistent/x.csv", "-o", out.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let empty = write(dir.path(), "empty.csv", "");
    let o = run(&["lookup", "-i", empty.to_str().unwrap(), "-o", out.to_str().unwrap(), "--seed", "1", "--stress-window", STRESS]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["var", "-i", &input, "-o", out.to_str().unwrap(), "--seed", "1", "--stress-window", STRESS, "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "validation");
    // a stress window shorter than window_days cannot be computed
    let o = run(&["var", "-i", &input, "-o", out.to_str().unwrap(), "--seed", "1", "--stress-window", "2007-06-01:2007-09-01"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_keys_are_checked_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = series_file(dir.path(), 700, 5);
    let out = dir.path().join("o");
    let bad = write(dir.path(), "bad.cfg", "alpha = 0.95\nalfa = 0.9\n");
    let o = run(&["sensitivity", "-c", bad.to_str().unwrap(), "-i", &input, "-o", out.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["line"], 2);
    let cfg = write(dir.path(), "good.cfg", "alpha = 0.95\nseed = 9\n");
    ok(&run(&["sensitivity", "-c", cfg.to_str().unwrap(), "-i", &input, "-o", out.to_str().unwrap(), "--alpha", "0.975"]));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["alpha"], "0.975");
    assert_eq!(m["config"]["seed"], "9");
}

#[test]
fn config_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = series_file(dir.path(), 800, 6);
    let a = dir.path().join("a");
    ok(&run(&["var", "-i", &input, "-o", a.to_str().unwrap(), "--seed", "8", "--stress-window", STRESS, "--beta", "0.95", "--model", "absolute,relative"]));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let cfg: String = m["config"].as_object().unwrap().iter().map(|(k, v)| format!("{k} = {}\n", v.as_str().unwrap())).collect();
    let cfg = write(dir.path(), "echo.cfg", &cfg);
    let b = dir.path().join("b");
    ok(&run(&["var", "-c", cfg.to_str().unwrap(), "-i", &input, "-o", b.to_str().unwrap()]));
    assert_eq!(files(&a), files(&b));
}

#[test]
fn constant_level_function_reproduces_relative_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = series_file(dir.path(), 800, 7);
    let out = dir.path().join("o");
    ok(&run(&["var", "-i", &input, "-o", out.to_str().unwrap(), "--seed", "2", "--stress-window", STRESS, "--model", "relative,level-relative", "--level-fn", "0.5,0,0"]));
    let rows = csv_rows(&out.join("report.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows[1][5].starts_with("level-relative"));
    // every column except the model id
    for c in (0..rows[0].len()).filter(|c| *c != 5) {
        assert_eq!(rows[0][c], rows[1][c], "column {c}");
    }
}

#[test]
fn var_matches_module_by_module_run() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = series_file(dir.path(), 800, 8);
    for mode in ["sum", "two-max"] {
        let out = dir.path().join(mode);
        ok(&run(&["var", "-i", &input, "-o", out.to_str().unwrap(), "--seed", "4", "--stress-window", STRESS, "--model", "absolute", "--capital-mode", mode]));
        let rows = csv_rows(&out.join("report.csv"));

        let raw = read_series_csv(&fs::read_to_string(&input).unwrap(), "value").unwrap();
        let ts = clean_series(&raw, &CleaningConfig::new(4), false).unwrap().series;
        let n = ts.len();
        let cfg = RiskConfig::default();
        let spec = DataModelSpec::absolute(10).unwrap();
        let d = ts.dates();
        let state = MarketState::new(d[n - 1], ts.values()[n - 1].unwrap(), d[n - 270]).unwrap();
        let (s0, s1) = STRESS.split_once(':').unwrap();
        let stress = (s0.parse().unwrap(), s1.parse().unwrap());
        let st = svar_report(&ts, stress, &spec, state, &cfg).unwrap();
        let cur = svar_report(&ts, (d[n - 270], d[n - 1]), &spec, state, &cfg).unwrap();
        let var_loss = cur.losses().var_value.max(0.0);
        let svar_loss = st.losses().var_value.max(0.0);
        let m: CapitalMode = mode.parse().unwrap();
        let capital = capital_charge(var_loss, svar_loss, m).unwrap();
        let f = |i: usize| rows[0][i].parse::<f64>().unwrap();
        assert_eq!(f(6), st.lower.var_value);
        assert_eq!(f(7), st.upper.var_value);
        assert_eq!(f(8), st.lower.es_value);
        assert_eq!(f(9), st.upper.es_value);
        assert_eq!(f(14), capital);
        match m {
            CapitalMode::Sum => assert_eq!(f(14), f(11) + f(12)),
            CapitalMode::TwoMax => assert_eq!(f(14), 2.0 * f(11).max(f(12))),
        }
    }
}

#[test]
fn swap_var_on_a_curve_panel() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", &curve_panel_csv(700, 9));
    let out = dir.path().join("o");
    ok(&run(&["var", "-i", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--seed", "1", "--stress-window", STRESS, "--model", "absolute,relative", "--maturities", "2,10"]));
    let rows = csv_rows(&out.join("report.csv"));
    let keys: Vec<(&str, &str)> = rows.iter().map(|r| (r[4].as_str(), r[5].as_str())).collect();
    assert_eq!(keys, vec![("2.0", "absolute/10d"), ("2.0", "relative/10d"), ("10.0", "absolute/10d"), ("10.0", "relative/10d")]);
    for r in &rows {
        let (lo, hi): (f64, f64) = (r[6].parse().unwrap(), r[7].parse().unwrap());
        assert!(lo < 0.0 && hi > 0.0, "{r:?}");
    }
}

#[test]
fn analyze_level_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // every value inside one 25bp bucket
    let dates = bdays(start(), 300);
    let v: Vec<Option<f64>> = (0..300).map(|i| Some(0.0301 + 1e-6 * ((i * 7) % 13) as f64)).collect();
    let input = write(dir.path(), "one.csv", &series_csv(&dates, &v));
    let out = dir.path().join("o");
    ok(&run(&["analyze-level", "-i", input.to_str().unwrap(), "-o", out.to_str().unwrap()]));
    assert_eq!(csv_rows(&out.join("buckets.csv")).len(), 1);
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert!(fit["fit"].is_null() && fit["fit_error"].is_string());

    let (input, _) = series_file(dir.path(), 3000, 10);
    let out = dir.path().join("p");
    ok(&run(&["analyze-level", "-i", &input, "-o", out.to_str().unwrap(), "--holding", "1", "--degree", "1", "--target", "absolute"]));
    let ts = read_series_csv(&fs::read_to_string(&input).unwrap(), "value").unwrap();
    let b = bucket_sd(&ts, 1, 25.0, 20).unwrap();
    let rows = csv_rows(&out.join("buckets.csv"));
    assert_eq!(rows.len(), b.len());
    for (r, b) in rows.iter().zip(&b) {
        assert_eq!(r[4].parse::<f64>().unwrap(), b.sd_absolute);
        assert_eq!(r[5].parse::<usize>().unwrap(), b.count);
    }
    let plot = fs::read_to_string(out.join("plot.csv")).unwrap();
    assert!(plot.starts_with("series,level,sd\n") && plot.contains("fitted,"));
}

#[test]
fn gapscan_replays_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let text = name_panel_csv(12, 200, 11);
    let input = write(dir.path(), "names.csv", &text);
    let out = dir.path().join("o");
    ok(&run(&["gapscan", "-i", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--k", "2", "--span", "10"]));
    let panel = read_panel_csv(&text).unwrap();
    let d = panel.dates();
    let expected = gap_report(&panel, d[d.len() - 1], (d[0], d[d.len() - 1]), 2, 10, Exec::Sequential).unwrap();
    let got: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("gap_report.json")).unwrap()).unwrap();
    assert_eq!(got["report"], serde_json::to_value(&expected).unwrap());
    assert!(out.join("percentile_0.9.csv").exists());
}

#[test]
fn sensitivity_replays_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let dates = bdays(start(), 500);
    let mut v: Vec<Option<f64>> = walk(500, 12, 0.04, 0.0001).into_iter().map(Some).collect();
    v[300] = v[300].map(|x| x - 0.004);
    let text = series_csv(&dates, &v);
    let input = write(dir.path(), "s.csv", &text);
    let out = dir.path().join("o");
    ok(&run(&["sensitivity", "-i", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--seed", "5"]));
    let ts = read_series_csv(&text, "value").unwrap();
    let pts = rolling_clean_sensitivity(&ts, &CleaningConfig::new(5), &RiskConfig::default()).unwrap();
    let rows = csv_rows(&out.join("sensitivity.csv"));
    assert_eq!(rows.len(), pts.len());
    for (r, p) in rows.iter().zip(&pts) {
        assert_eq!(r[0], p.date.to_string());
        assert_eq!(r[2].parse::<f64>().unwrap(), p.es_change);
    }
    assert!(pts.iter().any(|p| p.flagged && p.es_change > 0.0));
}

#[test]
fn lookup_replays_the_library_in_either_exec_mode() {
    let dir = tempfile::tempdir().unwrap();
    let text = curve_panel_csv(700, 13);
    let input = write(dir.path(), "p.csv", &text);
    let common = ["--seed", "6", "--stress-window", STRESS, "--tenors", "IRS:2Y,IRS:10Y", "--levels", "0.01:0.03"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let mut args = vec!["lookup", "-i", input.to_str().unwrap(), "-o", a.to_str().unwrap()];
    args.extend(common);
    ok(&run(&args));
    args[4] = b.to_str().unwrap();
    args.extend(["--exec", "sequential"]);
    ok(&run(&args));
    assert_eq!(files(&a), files(&b));

    let panel = clean_panel(&read_panel_csv(&text).unwrap(), &CleaningConfig::new(6), false).unwrap().panel;
    let specs = vec![DataModelSpec::absolute(10).unwrap(), DataModelSpec::relative(10).unwrap()];
    let buckets: Vec<(f64, f64)> = (0..8).map(|i| (0.01 + i as f64 * 0.0025, 0.01 + (i + 1) as f64 * 0.0025)).collect();
    let tenors = vec!["IRS:2Y".to_string(), "IRS:10Y".to_string()];
    let window = ("2007-06-01".parse().unwrap(), "2008-06-30".parse().unwrap());
    let input = LookupInput { panel: &panel, window_id: "stress", window, specs: &specs, buckets: &buckets, tenors: &tenors };
    let expected = build_lookup_table(&input, &RiskConfig::default()).unwrap();
    let got = LookupTable::from_json(&fs::read_to_string(a.join("lookup.json")).unwrap()).unwrap();
    assert_eq!(got, expected);
}
