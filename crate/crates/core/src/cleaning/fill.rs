//! By-date completion of curve panels: interpolation across tenor, short
//! linear fills across time, then flat (Libor) or constant-spread (OIS)
//! extrapolation.

use chrono::NaiveDate;

use super::changelog::{Action, ChangeLog};
use super::monotone::MonotoneCubic;
use super::CleaningConfig;
use crate::error::{Error, Result};
use crate::panel::{CurveFamily, Instrument, InstrumentPanel};

/// Fills quotes missing strictly inside the tenor range of the present
/// quotes on one date. `row` and `instruments` describe a single curve.
pub fn fill_curve_date(
    date: NaiveDate,
    row: &[Option<f64>],
    instruments: &[Instrument],
) -> Result<(Vec<Option<f64>>, ChangeLog)> {
    assert_eq!(row.len(), instruments.len());
    let mut present: Vec<(f64, f64)> = row
        .iter()
        .zip(instruments)
        .filter_map(|(q, ins)| q.map(|v| (ins.year_fraction(), v)))
        .collect();
    if present.len() < 2 {
        return Err(Error::InsufficientData { what: "present quotes on a curve date", needed: 2, got: present.len() });
    }
    present.sort_by(|a, b| a.0.total_cmp(&b.0));
    present.dedup_by(|b, a| a.0 == b.0);
    let (lo, hi) = (present[0].0, present[present.len() - 1].0);
    let mut out = row.to_vec();
    let mut log = ChangeLog::new();
    if present.len() < 2 {
        return Ok((out, log));
    }
    let spline = MonotoneCubic::new(present.iter().map(|p| p.0).collect(), present.iter().map(|p| p.1).collect())?;
    for (k, ins) in instruments.iter().enumerate() {
        let t = ins.year_fraction();
        if out[k].is_none() && t > lo && t < hi {
            let v = spline.eval(t);
            out[k] = Some(v);
            log.push(date, &ins.id(), Action::Interpolated, None, v);
        }
    }
    Ok((out, log))
}

fn family_columns(panel: &InstrumentPanel, family: CurveFamily) -> Vec<usize> {
    panel
        .instruments()
        .iter()
        .enumerate()
        .filter(|(_, i)| i.family() == Some(family))
        .map(|(k, _)| k)
        .collect()
}

/// Applies [`fill_curve_date`] to every date and curve family; dates with
/// fewer than two quotes on a curve are left alone.
pub fn fill_curve_dates(panel: &InstrumentPanel) -> Result<(InstrumentPanel, ChangeLog)> {
    let mut rows = panel.rows().to_vec();
    let mut log = ChangeLog::new();
    for family in [CurveFamily::Ois, CurveFamily::Libor] {
        let cols = family_columns(panel, family);
        if cols.len() < 3 {
            continue;
        }
        let instruments: Vec<Instrument> = cols.iter().map(|&c| panel.instruments()[c].clone()).collect();
        for (r, date) in panel.dates().iter().enumerate() {
            let sub: Vec<Option<f64>> = cols.iter().map(|&c| rows[r][c]).collect();
            if sub.iter().flatten().count() < 2 || sub.iter().all(Option::is_some) {
                continue;
            }
            let (filled, l) = fill_curve_date(*date, &sub, &instruments)?;
            for (k, &c) in cols.iter().enumerate() {
                rows[r][c] = filled[k];
            }
            log.append(l);
        }
    }
    Ok((panel.with_quotes(rows), log))
}

/// Result of [`fill_time_gaps`].
#[derive(Debug, Clone, PartialEq)]
pub struct GapFill {
    pub panel: InstrumentPanel,
    pub log: ChangeLog,
    /// Ids of curve instruments with no quote at all; they are left missing
    /// unless interpolation across tenor reaches them.
    pub all_missing: Vec<String>,
}

/// Linear fill across time for short gaps, re-interpolation across tenor,
/// then extrapolation of what remains: flat for Libor instruments,
/// constant OIS-to-Libor spread for OIS instruments. CDS columns are left
/// untouched.
pub fn fill_time_gaps(panel: &InstrumentPanel, cfg: &CleaningConfig) -> Result<GapFill> {
    cfg.validate()?;
    let dates = panel.dates();
    let mut work = panel.clone();
    let mut log = ChangeLog::new();
    let curve_cols: Vec<usize> =
        (0..panel.instruments().len()).filter(|&c| panel.instruments()[c].family().is_some()).collect();
    let all_missing: Vec<String> = curve_cols
        .iter()
        .filter(|&&c| panel.column(c).iter().all(Option::is_none))
        .map(|&c| panel.instruments()[c].id())
        .collect();

    // short interior gaps, linear in calendar time
    for &c in &curve_cols {
        let id = panel.instruments()[c].id();
        let mut col = work.column(c);
        let present: Vec<usize> = (0..col.len()).filter(|&r| col[r].is_some()).collect();
        for w in present.windows(2) {
            let (a, b) = (w[0], w[1]);
            let gap = b - a - 1;
            if gap == 0 || gap > cfg.max_time_gap_days {
                continue;
            }
            let (va, vb) = (col[a].unwrap(), col[b].unwrap());
            let span = (dates[b] - dates[a]).num_days() as f64;
            for r in a + 1..b {
                let t = (dates[r] - dates[a]).num_days() as f64 / span;
                let v = va + (vb - va) * t;
                col[r] = Some(v);
                log.push(dates[r], &id, Action::TimeFilled, None, v);
            }
        }
        work.set_column(c, &col);
    }

    let (reinterp, l) = fill_curve_dates(&work)?;
    work = reinterp;
    log.append(l);

    // Libor family first: OIS extrapolation reads the completed Libor quotes
    let libor: Vec<usize> = curve_cols.iter().copied().filter(|&c| panel.instruments()[c].family() == Some(CurveFamily::Libor)).collect();
    for &c in &libor {
        let id = panel.instruments()[c].id();
        let mut col = work.column(c);
        extrapolate_flat(&mut col, |r, v| log.push(dates[r], &id, Action::ExtrapolatedFlat, None, v));
        work.set_column(c, &col);
    }
    let ois: Vec<usize> = curve_cols.iter().copied().filter(|&c| panel.instruments()[c].family() == Some(CurveFamily::Ois)).collect();
    for &c in &ois {
        let ins = &panel.instruments()[c];
        let id = ins.id();
        let mut col = work.column(c);
        let partner = libor.iter().copied().find(|&l| panel.instruments()[l].tenor == ins.tenor);
        match partner {
            Some(l) => {
                let lib = work.column(l);
                extrapolate_spread(&mut col, &lib, |r, v, a| log.push(dates[r], &id, a, None, v));
            }
            None => extrapolate_flat(&mut col, |r, v| log.push(dates[r], &id, Action::ExtrapolatedFlat, None, v)),
        }
        work.set_column(c, &col);
    }
    log.sort();
    Ok(GapFill { panel: work, log, all_missing })
}

fn extrapolate_flat(col: &mut [Option<f64>], mut record: impl FnMut(usize, f64)) {
    let Some(first) = col.iter().position(Option::is_some) else { return };
    let v0 = col[first].unwrap();
    for (r, cell) in col[..first].iter_mut().enumerate() {
        *cell = Some(v0);
        record(r, v0);
    }
    let mut last = v0;
    for (r, cell) in col.iter_mut().enumerate().skip(first) {
        match cell {
            Some(v) => last = *v,
            None => {
                *cell = Some(last);
                record(r, last);
            }
        }
    }
}

/// Holds the OIS minus Libor spread at its nearest observed value; falls
/// back to flat where no spread has been observed or Libor is missing.
fn extrapolate_spread(col: &mut [Option<f64>], libor: &[Option<f64>], mut record: impl FnMut(usize, f64, Action)) {
    let spread_at = |r: usize, c: &[Option<f64>]| match (c[r], libor[r]) {
        (Some(o), Some(l)) => Some(o - l),
        _ => None,
    };
    let Some(first) = col.iter().position(Option::is_some) else { return };
    let first_spread = (first..col.len()).find_map(|r| spread_at(r, col));
    let orig = col.to_vec();
    let mut last_spread = None;
    let mut last_value = orig[first].unwrap();
    for r in 0..col.len() {
        if orig[r].is_some() {
            last_value = orig[r].unwrap();
            if let Some(s) = spread_at(r, &orig) {
                last_spread = Some(s);
            }
            continue;
        }
        let spread = if r < first { first_spread } else { last_spread };
        let (v, action) = match (spread, libor[r]) {
            (Some(s), Some(l)) => (l + s, Action::ExtrapolatedConstantSpread),
            _ => (if r < first { orig[first].unwrap() } else { last_value }, Action::ExtrapolatedFlat),
        };
        col[r] = Some(v);
        record(r, v, action);
    }
}
