#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn bdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if chrono::Datelike::weekday(&d).number_from_monday() <= 5 {
            out.push(d);
        }
        d = d.succ_opt().unwrap();
    }
    out
}

pub fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2007, 1, 1).unwrap()
}

/// Random walk around `level` with daily steps of `sd`.
pub fn walk(n: usize, seed: u64, level: f64, sd: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = level;
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            x += sd * z;
            x
        })
        .collect()
}

pub fn series_csv(dates: &[NaiveDate], values: &[Option<f64>]) -> String {
    let mut s = String::from("date,value\n");
    for (d, v) in dates.iter().zip(values) {
        match v {
            Some(v) => s.push_str(&format!("{d},{v:.8}\n")),
            None => s.push_str(&format!("{d},\n")),
        }
    }
    s
}

pub const CURVE_IDS: [&str; 10] =
    ["DEPO:3M", "IRS:1Y", "IRS:2Y", "IRS:5Y", "IRS:10Y", "OIS:3M", "OIS:1Y", "OIS:2Y", "OIS:5Y", "OIS:10Y"];

/// Upward-sloping Libor and OIS quotes driven by one random walk.
pub fn curve_panel_csv(n: usize, seed: u64) -> String {
    let dates = bdays(start(), n);
    let lvl = walk(n, seed, 0.04, 0.0004);
    let mut s = format!("date,{}\n", CURVE_IDS.join(","));
    for (d, l) in dates.iter().zip(&lvl) {
        let libor: Vec<f64> = (0..5).map(|k| l + 0.001 * k as f64).collect();
        let ois = libor.iter().map(|v| v - 0.002);
        let cells: Vec<String> = libor.iter().copied().chain(ois).map(|v| format!("{v:.6}")).collect();
        s.push_str(&format!("{d},{}\n", cells.join(",")));
    }
    s
}

/// CDS-style panel with staggered inceptions and random gaps.
pub fn name_panel_csv(names: usize, n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dates = bdays(start(), n);
    let inception: Vec<usize> = (0..names).map(|_| rng.random_range(0..n / 3)).collect();
    let ids: Vec<String> = (0..names).map(|i| format!("CDS:N{i}")).collect();
    let mut s = format!("date,{}\n", ids.join(","));
    for (r, d) in dates.iter().enumerate() {
        let cells: Vec<String> = (0..names)
            .map(|c| {
                if r < inception[c] || rng.random_bool(0.08) {
                    String::new()
                } else {
                    format!("{:.5}", 0.01 + 0.001 * c as f64 + 0.0001 * (r % 7) as f64)
                }
            })
            .collect();
        s.push_str(&format!("{d},{}\n", cells.join(",")));
    }
    s
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tailrisk")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

pub fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p
}

/// Every file in `dir`, sorted by name.
pub fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

pub fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&o.stderr)))
}
