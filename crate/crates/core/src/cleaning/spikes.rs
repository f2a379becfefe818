//! Removal of short up-then-down excursions from a single series.

use std::collections::BTreeMap;

use super::changelog::{Action, ChangeLog};
use super::repair::finish;
use super::CleaningConfig;
use crate::datamodel::ZERO_LEVEL_FLOOR;
use crate::error::Result;
use crate::series::TimeSeries;

fn tolerance(p: f64, rel: f64) -> f64 {
    if p.abs() < ZERO_LEVEL_FLOOR {
        ZERO_LEVEL_FLOOR
    } else {
        rel * p.abs()
    }
}

/// True when `x[start..start+width]` departs from `x[start-1]` by more than
/// the tolerance at every point and `x[start+width]` returns within it.
pub fn is_spike(x: &[f64], start: usize, width: usize, rel_tol: f64) -> bool {
    if start == 0 || start + width >= x.len() {
        return false;
    }
    let p = x[start - 1];
    let tol = tolerance(p, rel_tol);
    (x[start + width] - p).abs() <= tol && x[start..start + width].iter().all(|v| (v - p).abs() > tol)
}

/// Replaces every spike of width `1..=spike_max_width_days` by the straight
/// line between its bounding points. Narrow widths are exhausted before
/// wider ones, left to right, and the scan repeats until nothing changes.
pub fn clean_spikes(ts: &TimeSeries, cfg: &CleaningConfig) -> Result<(TimeSeries, ChangeLog)> {
    cfg.validate()?;
    let idx: Vec<usize> = (0..ts.len()).filter(|&i| ts.values()[i].is_some()).collect();
    let original: Vec<f64> = idx.iter().map(|&i| ts.values()[i].unwrap()).collect();
    let mut x = original.clone();
    let mut changed = BTreeMap::new();
    let n = x.len();
    for _ in 0..n.max(1) {
        let mut any = false;
        for w in 1..=cfg.spike_max_width_days {
            let mut s = 1;
            while s + w < n {
                if is_spike(&x, s, w, cfg.spike_return_tolerance) {
                    let (p, a) = (x[s - 1], x[s + w]);
                    for j in 0..w {
                        x[s + j] = p + (a - p) * (j + 1) as f64 / (w + 1) as f64;
                        changed.entry(s + j).or_insert(Action::SpikeRemoved);
                    }
                    any = true;
                    s += w;
                } else {
                    s += 1;
                }
            }
        }
        if !any {
            break;
        }
    }
    Ok(finish(ts, &idx, &original, &x, &changed))
}
