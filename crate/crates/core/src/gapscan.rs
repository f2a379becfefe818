//! Missing-data measurement for a name × date quote panel.
//!
//! A name counts as missing on a business day only after its first quote:
//! pre-inception absence is not a gap. Span windows are trailing, ending at
//! the evaluation date.

use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::metrics::cdf_rank;
use crate::panel::InstrumentPanel;
use crate::series::{business_days, is_business_day, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub universe_count: usize,
    pub available_asof_count: usize,
    pub pct_available_in_window: f64,
    pub pct_available_throughout: f64,
    /// Per window date: percentage of as-of names with at least `k` gaps in
    /// the trailing span. Empty unless requested.
    pub pct_with_k_gaps_in_span: Vec<(NaiveDate, f64)>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn check_window(panel: &InstrumentPanel, window: (NaiveDate, NaiveDate)) -> Result<Vec<NaiveDate>> {
    let days = business_days(window.0, window.1);
    if days.is_empty() || panel.dates().is_empty() {
        return Err(Error::EmptyWindow { start: window.0, end: window.1 });
    }
    Ok(days)
}

fn available_on(panel: &InstrumentPanel, as_of: NaiveDate) -> Result<Vec<usize>> {
    let dates = panel.dates();
    if dates.is_empty() || as_of < dates[0] || as_of > dates[dates.len() - 1] {
        return Err(Error::config("as_of", format!("{as_of} is outside the panel's date range")));
    }
    let Some(r) = panel.row_index(as_of) else {
        return Ok(vec![]);
    };
    Ok((0..panel.instruments().len()).filter(|&c| panel.quote(r, c).is_some()).collect())
}

/// Universe, names available on `as_of`, and how many of those are quoted
/// somewhere in, and on every business day of, `window`.
pub fn availability_report(panel: &InstrumentPanel, as_of: NaiveDate, window: (NaiveDate, NaiveDate)) -> Result<GapReport> {
    let days = check_window(panel, window)?;
    let names = available_on(panel, as_of)?;
    let universe = (0..panel.instruments().len()).filter(|&c| panel.column(c).iter().any(Option::is_some)).count();
    let rows: Vec<Option<usize>> = days.iter().map(|d| panel.row_index(*d)).collect();
    let quoted = |c: usize, r: &Option<usize>| r.is_some_and(|r| panel.quote(r, c).is_some());
    let some = names.iter().filter(|&&c| rows.iter().any(|r| quoted(c, r))).count();
    let all = names.iter().filter(|&&c| rows.iter().all(|r| quoted(c, r))).count();
    Ok(GapReport {
        universe_count: universe,
        available_asof_count: names.len(),
        pct_available_in_window: pct(some, names.len()),
        pct_available_throughout: pct(all, names.len()),
        pct_with_k_gaps_in_span: vec![],
    })
}

/// Business days from `span − 1` days before `first` through `last`.
fn calendar(first: NaiveDate, last: NaiveDate, span: usize) -> Vec<NaiveDate> {
    let mut start = first;
    let mut back = span - 1;
    while back > 0 {
        start = start.pred_opt().expect("date in range");
        if is_business_day(start) {
            back -= 1;
        }
    }
    business_days(start, last)
}

/// For each business day of `window`, the percentage of names available on
/// `as_of` with at least `k` missing values in the trailing `span`
/// business days.
pub fn stress_gap_fraction(
    panel: &InstrumentPanel,
    window: (NaiveDate, NaiveDate),
    k: usize,
    span: usize,
    as_of: NaiveDate,
    exec: Exec,
) -> Result<Vec<(NaiveDate, f64)>> {
    if !(k >= 1 && span >= k) {
        return Err(Error::config("k", format!("need span >= k >= 1, got k = {k}, span = {span}")));
    }
    let days = check_window(panel, window)?;
    if span > days.len() {
        return Err(Error::InsufficientData { what: "business days in the window for the span", needed: span, got: days.len() });
    }
    let names = available_on(panel, as_of)?;
    let cal = calendar(days[0], days[days.len() - 1], span);
    let offset = cal.len() - days.len();
    let index: HashMap<NaiveDate, usize> = panel.dates().iter().enumerate().map(|(i, d)| (*d, i)).collect();
    // per name: missing flag on each calendar day
    let masks: Vec<Vec<bool>> = map_range(exec, names.len(), |j| {
        let c = names[j];
        let first = panel.dates().iter().enumerate().find(|(r, _)| panel.quote(*r, c).is_some()).map(|(_, d)| *d);
        cal.iter()
            .map(|d| {
                let present = index.get(d).is_some_and(|&r| panel.quote(r, c).is_some());
                !present && first.is_some_and(|f| f < *d)
            })
            .collect()
    });
    let counts: Vec<Vec<usize>> = map_range(exec, masks.len(), |j| {
        let m = &masks[j];
        let mut run: usize = m[..span].iter().filter(|x| **x).count();
        let mut out = Vec::with_capacity(days.len());
        out.push(run);
        for i in span..cal.len() {
            run = run + m[i] as usize - m[i - span] as usize;
            out.push(run);
        }
        out
    });
    debug_assert!(counts.iter().all(|c| c.len() == cal.len() - span + 1));
    let first_end = span - 1;
    Ok(days
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let pos = offset + i - first_end;
            let hit = counts.iter().filter(|c| c[pos] >= k).count();
            (*d, pct(hit, names.len()))
        })
        .collect())
}

/// [`availability_report`] plus the per-date gap track.
pub fn gap_report(
    panel: &InstrumentPanel,
    as_of: NaiveDate,
    window: (NaiveDate, NaiveDate),
    k: usize,
    span: usize,
    exec: Exec,
) -> Result<GapReport> {
    let mut r = availability_report(panel, as_of, window)?;
    r.pct_with_k_gaps_in_span = stress_gap_fraction(panel, window, k, span, as_of, exec)?;
    Ok(r)
}

/// Nearest-rank `q` quantile across the names quoted on each date.
pub fn percentile_track(panel: &InstrumentPanel, q: f64) -> Result<TimeSeries> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::OutOfRange { what: "q", value: q, lo: 0.0, hi: 1.0 });
    }
    let values = panel
        .rows()
        .iter()
        .map(|row| {
            let mut v: Vec<f64> = row.iter().flatten().copied().collect();
            if v.is_empty() {
                return None;
            }
            v.sort_by(f64::total_cmp);
            Some(v[cdf_rank(v.len(), q) - 1])
        })
        .collect();
    Ok(TimeSeries::from_parts(format!("q{q}"), panel.dates().to_vec(), values))
}

/// CSV `date,value` with empty cells for missing values.
pub fn gap_track_csv(track: &[(NaiveDate, f64)]) -> String {
    let mut s = String::from("date,value\n");
    for (d, v) in track {
        s.push_str(&format!("{d},{v}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Instrument;
    use crate::series::testutil::bdays;

    fn panel(names: usize, days: usize, missing: impl Fn(usize, usize) -> bool) -> InstrumentPanel {
        let d = bdays(days);
        let ins = (0..names).map(|n| Instrument::cds(&format!("N{n}"))).collect();
        let q = (0..days).map(|r| (0..names).map(|c| (!missing(r, c)).then_some(0.01 + c as f64 * 1e-3)).collect()).collect();
        InstrumentPanel::new(d, ins, q).unwrap()
    }

    #[test]
    fn dense_panel() {
        let p = panel(4, 40, |_, _| false);
        let d = p.dates().to_vec();
        let r = gap_report(&p, d[39], (d[10], d[30]), 3, 10, Exec::Sequential).unwrap();
        assert_eq!((r.universe_count, r.available_asof_count), (4, 4));
        assert_eq!((r.pct_available_in_window, r.pct_available_throughout), (100.0, 100.0));
        assert!(r.pct_with_k_gaps_in_span.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn half_absent_in_window() {
        let p = panel(4, 40, |r, c| c >= 2 && (10..=30).contains(&r));
        let d = p.dates().to_vec();
        let r = availability_report(&p, d[39], (d[10], d[30])).unwrap();
        assert_eq!(r.pct_available_in_window, 50.0);
        assert_eq!(r.pct_available_throughout, 50.0);
    }

    #[test]
    fn three_day_gap_in_one_of_four() {
        let p = panel(4, 60, |r, c| c == 1 && (20..23).contains(&r));
        let d = p.dates().to_vec();
        let track = stress_gap_fraction(&p, (d[15], d[45]), 3, 10, d[59], Exec::Sequential).unwrap();
        for (i, (_, v)) in track.iter().enumerate() {
            let end = 15 + i;
            let covers = (22..29 + 1).contains(&end);
            assert_eq!(*v, if covers { 25.0 } else { 0.0 }, "row {end}");
        }
    }

    #[test]
    fn inception_is_not_a_gap() {
        let p = panel(2, 40, |r, c| c == 1 && r < 25);
        let d = p.dates().to_vec();
        let track = stress_gap_fraction(&p, (d[10], d[39]), 1, 5, d[39], Exec::Sequential).unwrap();
        assert!(track.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn percentile_examples() {
        let d = bdays(2);
        let ins = (0..3).map(|n| Instrument::cds(&format!("N{n}"))).collect();
        let p = InstrumentPanel::new(d, ins, vec![vec![Some(1.0), Some(2.0), Some(3.0)], vec![None, None, None]]).unwrap();
        let t = percentile_track(&p, 0.5).unwrap();
        assert_eq!(t.values(), &[Some(2.0), None]);
        assert!(percentile_track(&p, 1.0).is_err());
    }

    #[test]
    fn errors() {
        let p = panel(2, 20, |_, _| false);
        let d = p.dates().to_vec();
        assert!(stress_gap_fraction(&p, (d[0], d[5]), 3, 10, d[19], Exec::Sequential).is_err());
        assert!(stress_gap_fraction(&p, (d[0], d[15]), 4, 3, d[19], Exec::Sequential).is_err());
        let late = d[19] + chrono::Days::new(30);
        assert!(availability_report(&p, late, (d[0], d[5])).is_err());
    }
}
