use chrono::NaiveDate;

use super::brent::brent;
use super::swap::{annuity, deposit_rate, float_pv_on, ois_par_rate};
use super::{CurveRole, CurveSet, Regime, ZeroCurve};
use crate::error::{Error, Result};
use crate::panel::{Instrument, InstrumentKind, InstrumentPanel};

const QUOTE_TOL: f64 = 1e-14;
const MAX_ITER: usize = 200;
const BRACKETS: [(f64, f64); 3] = [(-0.05, 0.25), (-0.2, 0.6), (-0.6, 2.0)];

struct Quote<'a> {
    instrument: &'a Instrument,
    months: u32,
    value: f64,
}

fn collect<'a>(instruments: &'a [Instrument], quotes: &[Option<f64>], keep: impl Fn(&InstrumentKind) -> bool) -> Result<Vec<Quote<'a>>> {
    let mut out: Vec<Quote> = instruments
        .iter()
        .zip(quotes)
        .filter(|(i, q)| keep(&i.kind) && q.is_some())
        .map(|(i, q)| Quote { instrument: i, months: i.tenor.in_months(), value: q.unwrap() })
        .collect();
    out.sort_by_key(|q| q.months);
    if let Some(w) = out.windows(2).find(|w| w[0].months == w[1].months) {
        return Err(Error::InvalidPanel(format!("{} and {} share a pillar", w[0].instrument, w[1].instrument)));
    }
    Ok(out)
}

/// Pillar-by-pillar solve: each new pillar's zero rate is chosen so that
/// `model` reprices the quote, with earlier pillars held fixed.
fn solve(
    as_of: NaiveDate,
    role: CurveRole,
    quotes: &[Quote],
    model: impl Fn(&ZeroCurve, &Quote) -> f64,
) -> Result<ZeroCurve> {
    if quotes.is_empty() {
        return Err(Error::InsufficientData { what: "curve instruments with quotes", needed: 1, got: 0 });
    }
    let mut pillars: Vec<f64> = Vec::with_capacity(quotes.len());
    let mut zeros: Vec<f64> = Vec::with_capacity(quotes.len());
    for q in quotes {
        let t = q.months as f64 / 12.0;
        let tol = (QUOTE_TOL * q.value.abs()).max(1e-17);
        let err = |z: f64| {
            let mut p = pillars.clone();
            let mut zs = zeros.clone();
            p.push(t);
            zs.push(z);
            model(&ZeroCurve::unchecked(as_of, p, zs, role), q) - q.value
        };
        let root = BRACKETS.iter().find_map(|&(a, b)| brent(err, a, b, tol, MAX_ITER));
        let Some(z) = root else {
            return Err(Error::NonConvergence { pillar: t, instrument: q.instrument.id() });
        };
        pillars.push(t);
        zeros.push(z);
    }
    ZeroCurve::new(as_of, pillars, zeros, role)
}

fn is_libor(k: &InstrumentKind) -> bool {
    matches!(k, InstrumentKind::Deposit | InstrumentKind::LiborSwap)
}

/// Bootstraps one date's quotes. Single-curve: deposits and Libor swaps
/// give one curve used for both projection and discounting. Multi-curve:
/// OIS swaps give the discount curve, deposits and Libor swaps the
/// projection curve. Instruments with no quote are left out; CDS quotes are
/// ignored.
pub fn bootstrap(as_of: NaiveDate, instruments: &[Instrument], quotes: &[Option<f64>], regime: Regime) -> Result<CurveSet> {
    if instruments.len() != quotes.len() {
        return Err(Error::InvalidPanel("one quote per instrument is required".into()));
    }
    let libor = collect(instruments, quotes, is_libor)?;
    match regime {
        Regime::SingleCurve => {
            let c = solve(as_of, CurveRole::Discount, &libor, |c, q| libor_model(c, c, q))?;
            Ok(CurveSet::single(c))
        }
        Regime::MultiCurve => {
            let ois = collect(instruments, quotes, |k| matches!(k, InstrumentKind::OisSwap))?;
            let d = solve(as_of, CurveRole::Discount, &ois, |c, q| ois_par_rate(c, q.months))?;
            let p = solve(as_of, CurveRole::Projection, &libor, |c, q| libor_model(&d, c, q))?;
            CurveSet::multi(d, p)
        }
    }
}

fn libor_model(discount: &ZeroCurve, projection: &ZeroCurve, q: &Quote) -> f64 {
    match q.instrument.kind {
        InstrumentKind::Deposit => deposit_rate(projection, q.months),
        _ => float_pv_on(discount, projection, q.months) / annuity(discount, q.months),
    }
}

pub fn bootstrap_row(panel: &InstrumentPanel, row: usize, regime: Regime) -> Result<CurveSet> {
    bootstrap(panel.dates()[row], panel.instruments(), &panel.rows()[row], regime)
}

/// Model quote of `instrument` on `cs`; `None` for CDS.
pub fn reprice(cs: &CurveSet, instrument: &Instrument) -> Option<f64> {
    let months = instrument.tenor.in_months();
    let q = Quote { instrument, months, value: 0.0 };
    match instrument.kind {
        InstrumentKind::OisSwap => Some(ois_par_rate(cs.discount(), months)),
        InstrumentKind::Deposit | InstrumentKind::LiborSwap => Some(libor_model(cs.discount(), cs.projection(), &q)),
        InstrumentKind::Cds { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::tenor_rates;

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2006, 3, 1).unwrap()
    }

    fn irs(years: &[u32]) -> Vec<Instrument> {
        years.iter().map(|y| Instrument::libor(&format!("{y}Y")).unwrap()).collect()
    }

    #[test]
    fn flat_two_percent_annual_gives_flat_continuous_zero() {
        let years: Vec<u32> = (1..=30).collect();
        let ins = irs(&years);
        let q = vec![Some(0.02); ins.len()];
        let cs = bootstrap(day(), &ins, &q, Regime::SingleCurve).unwrap();
        for z in cs.discount().zero_rates() {
            assert!((z - 1.02f64.ln()).abs() < 1e-11, "{z}");
        }
        for i in &ins {
            assert!((reprice(&cs, i).unwrap() - 0.02).abs() <= 1e-10 * 0.02);
        }
    }

    #[test]
    fn multi_curve_flat_spread() {
        let mut ins = vec![Instrument::ois("3M").unwrap(), Instrument::deposit("3M").unwrap()];
        let mut q = vec![Some(0.02), Some(0.022)];
        for y in [1, 2, 3, 5, 7, 10, 15, 20, 30] {
            ins.push(Instrument::ois(&format!("{y}Y")).unwrap());
            q.push(Some(0.02));
            ins.push(Instrument::libor(&format!("{y}Y")).unwrap());
            q.push(Some(0.022));
        }
        let cs = bootstrap(day(), &ins, &q, Regime::MultiCurve).unwrap();
        for (i, v) in ins.iter().zip(&q) {
            let r = reprice(&cs, i).unwrap();
            assert!((r - v.unwrap()).abs() <= 1e-10 * v.unwrap(), "{i}: {r}");
        }
        let (_, s) = tenor_rates(&cs, &[0.25, 2.0, 5.0, 10.0, 30.0]).unwrap();
        for x in s {
            assert!((x - 0.002).abs() < 1.5e-4, "{x}");
        }
    }

    #[test]
    fn missing_curve_is_reported() {
        let ins = irs(&[1, 2]);
        let e = bootstrap(day(), &ins, &[Some(0.02), Some(0.02)], Regime::MultiCurve).unwrap_err();
        assert!(matches!(e, Error::InsufficientData { .. }));
    }

    #[test]
    fn absurd_quote_names_its_pillar() {
        let ins = irs(&[1, 2]);
        let e = bootstrap(day(), &ins, &[Some(0.02), Some(-0.9)], Regime::SingleCurve).unwrap_err();
        match e {
            Error::NonConvergence { pillar, instrument } => {
                assert_eq!(pillar, 2.0);
                assert_eq!(instrument, "IRS:2Y");
            }
            other => panic!("{other:?}"),
        }
    }
}
