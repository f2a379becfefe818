//! Replacement of isolated bad points in a series already flagged by the
//! detection test.
//!
//! Two patterns are repaired, both against the threshold `q(r)`, the
//! `1 − r` nearest-rank quantile of absolute daily differences:
//!
//! * a single point whose differences to both neighbours exceed `q(r)` with
//!   opposite signs is replaced by the average of its neighbours;
//! * a point that jumps by more than `q(r)`, repeats for one observation,
//!   then jumps back by more than `q(r)` has both plateau points replaced by
//!   the straight line between the bounding observations.
//!
//! Passes repeat with a recomputed `q(r)` until nothing changes, which
//! makes the operation idempotent.

use std::collections::BTreeMap;

use super::changelog::{Action, ChangeLog};
use super::CleaningConfig;
use crate::error::Result;
use crate::metrics::quantile::{cdf_rank, sorted};
use crate::series::TimeSeries;

const MAX_PASSES: usize = 256;

/// `1 − trim` nearest-rank quantile of absolute daily differences.
pub fn outlier_threshold(values: &[f64], trim_fraction: f64) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let abs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let s = sorted(&abs);
    Some(s[cdf_rank(s.len(), 1.0 - trim_fraction) - 1])
}

fn repeats(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

/// One left-to-right pass; returns indices changed with their rule.
fn pass(x: &mut [f64], q: f64, changed: &mut BTreeMap<usize, Action>) -> bool {
    let n = x.len();
    let mut any = false;
    let mut i = 1;
    while i + 1 < n {
        let d1 = x[i] - x[i - 1];
        let d2 = x[i + 1] - x[i];
        if d1.abs() > q && d2.abs() > q && d1.signum() != d2.signum() {
            x[i] = 0.5 * (x[i - 1] + x[i + 1]);
            changed.entry(i).or_insert(Action::OutlierReplaced);
            any = true;
            i += 1;
            continue;
        }
        if i + 2 < n {
            let d3 = x[i + 2] - x[i + 1];
            if d1.abs() > q && d3.abs() > q && d1.signum() != d3.signum() && repeats(x[i], x[i + 1]) {
                let (a, b) = (x[i - 1], x[i + 2]);
                x[i] = a + (b - a) / 3.0;
                x[i + 1] = a + 2.0 * (b - a) / 3.0;
                changed.entry(i).or_insert(Action::OutlierReplaced);
                changed.entry(i + 1).or_insert(Action::OutlierReplaced);
                any = true;
                i += 2;
                continue;
            }
        }
        i += 1;
    }
    any
}

/// Repairs to a fixed point with `q(r)` recomputed before every pass.
pub fn repair_outliers(ts: &TimeSeries, cfg: &CleaningConfig) -> Result<(TimeSeries, ChangeLog)> {
    cfg.validate()?;
    Ok(run(ts, |x| outlier_threshold(x, cfg.trim_fraction)))
}

/// Repairs to a fixed point against a caller-supplied threshold.
pub fn repair_outliers_with_threshold(ts: &TimeSeries, q: f64) -> (TimeSeries, ChangeLog) {
    run(ts, |_| Some(q))
}

fn run(ts: &TimeSeries, threshold: impl Fn(&[f64]) -> Option<f64>) -> (TimeSeries, ChangeLog) {
    // gaps are skipped: neighbours are the adjacent present observations
    let idx: Vec<usize> = (0..ts.len()).filter(|&i| ts.values()[i].is_some()).collect();
    let original: Vec<f64> = idx.iter().map(|&i| ts.values()[i].unwrap()).collect();
    let mut x = original.clone();
    let mut changed = BTreeMap::new();
    for _ in 0..MAX_PASSES {
        let Some(q) = threshold(&x) else { break };
        if !pass(&mut x, q, &mut changed) {
            break;
        }
    }
    finish(ts, &idx, &original, &x, &changed)
}

pub(crate) fn finish(
    ts: &TimeSeries,
    idx: &[usize],
    original: &[f64],
    x: &[f64],
    changed: &BTreeMap<usize, Action>,
) -> (TimeSeries, ChangeLog) {
    let mut values = ts.values().to_vec();
    let mut log = ChangeLog::new();
    for (&k, &action) in changed {
        if x[k].to_bits() != original[k].to_bits() {
            values[idx[k]] = Some(x[k]);
            log.push(ts.dates()[idx[k]], ts.id(), action, Some(original[k]), x[k]);
        }
    }
    (ts.with_values(values), log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::testutil::series;

    #[test]
    fn single_spike_replaced_by_neighbour_average() {
        let (out, log) = repair_outliers_with_threshold(&series(&[1.0, 1.0, 5.0, 1.0, 1.0]), 3.0);
        assert_eq!(out.complete_values().unwrap(), vec![1.0; 5]);
        assert_eq!(log.len(), 1);
        assert_eq!(log.entries()[0].old, Some(5.0));
        assert_eq!(log.entries()[0].action, Action::OutlierReplaced);
    }

    /// Brute-force rule check: every interior window of width one or two
    /// that matches a pattern on the raw data.
    fn pattern_sites(x: &[f64], q: f64) -> Vec<(usize, usize)> {
        let mut out = vec![];
        for i in 1..x.len() - 1 {
            let (d1, d2) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            if d1.abs() > q && d2.abs() > q && d1 * d2 < 0.0 {
                out.push((i, 1));
            }
            if i + 2 < x.len() {
                let d3 = x[i + 2] - x[i + 1];
                if d1.abs() > q && d3.abs() > q && d1 * d3 < 0.0 && x[i] == x[i + 1] {
                    out.push((i, 2));
                }
            }
        }
        out
    }

    #[test]
    fn plateau_of_one_extra_observation() {
        let raw = [1.0, 1.0, 5.0, 5.0, 1.0, 1.0];
        assert_eq!(pattern_sites(&raw, 3.0), vec![(2, 2)]);
        let (out, log) = repair_outliers_with_threshold(&series(&raw), 3.0);
        assert_eq!(out.complete_values().unwrap(), vec![1.0; 6]);
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn ramp_is_untouched() {
        let (out, log) = repair_outliers_with_threshold(&series(&[1.0, 2.0, 3.0, 4.0, 5.0]), 0.5);
        assert_eq!(out.complete_values().unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(log.is_empty());
    }

    #[test]
    fn threshold_is_nearest_rank() {
        let x: Vec<f64> = (0..101).map(|i| (i * i) as f64).collect();
        // differences 1,3,...,199; 97% nearest rank of 100 values is the 97th
        assert_eq!(outlier_threshold(&x, 0.03), Some(193.0));
    }

    #[test]
    fn gaps_are_skipped() {
        let d = crate::series::testutil::bdays(6);
        let ts = TimeSeries::from_parts("x", d, vec![Some(1.0), None, Some(9.0), None, Some(1.0), Some(1.0)]);
        let (out, log) = repair_outliers_with_threshold(&ts, 3.0);
        assert_eq!(out.values(), &[Some(1.0), None, Some(1.0), None, Some(1.0), Some(1.0)]);
        assert_eq!(log.apply_to_series(&ts), out);
    }
}
