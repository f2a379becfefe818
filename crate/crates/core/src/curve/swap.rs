//! Swap leg valuation. Fixed legs pay annually with 30/360 accrual and a
//! short stub at the front; floating legs reset quarterly on the projection
//! curve and are discounted on the discount curve. Payment times are in
//! months from the curve date.

use serde::{Deserialize, Serialize};

use super::{CurveSet, ZeroCurve};
use crate::error::{Error, Result};

/// Money-market accrual multiplier for ACT/360 on a 365-day year.
pub(crate) const ACT_360: f64 = 365.0 / 360.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Payer,
    Receiver,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Payer => 1.0,
            Direction::Receiver => -1.0,
        }
    }
}

/// Payment months counting back from `months` in steps of `step`.
fn schedule(months: u32, step: u32) -> Vec<u32> {
    let mut out: Vec<u32> = (0..).map(|k| months as i64 - (k * step) as i64).take_while(|m| *m > 0).map(|m| m as u32).collect();
    out.reverse();
    out
}

/// Fixed-leg annuity: sum of 30/360 accruals times discount factors.
pub fn annuity(discount: &ZeroCurve, months: u32) -> f64 {
    let mut prev = 0;
    let mut sum = 0.0;
    for m in schedule(months, 12) {
        sum += (m - prev) as f64 / 12.0 * discount.df(m as f64 / 12.0);
        prev = m;
    }
    sum
}

/// Floating-leg value per unit notional; the ACT/360 accrual cancels
/// between the forward rate and its payment.
pub fn float_leg_pv(cs: &CurveSet, months: u32) -> f64 {
    float_pv_on(cs.discount(), cs.projection(), months)
}

pub(crate) fn float_pv_on(d: &ZeroCurve, p: &ZeroCurve, months: u32) -> f64 {
    let mut prev_p = 1.0;
    let mut sum = 0.0;
    for m in schedule(months, 3) {
        let t = m as f64 / 12.0;
        let pt = p.df(t);
        sum += d.df(t) * (prev_p / pt - 1.0);
        prev_p = pt;
    }
    sum
}

/// Libor par swap rate.
pub fn par_rate(cs: &CurveSet, months: u32) -> f64 {
    float_leg_pv(cs, months) / annuity(cs.discount(), months)
}

/// OIS par rate: a single ACT/360 payment under one year, annual fixed
/// against compounded overnight beyond.
pub fn ois_par_rate(discount: &ZeroCurve, months: u32) -> f64 {
    let t = months as f64 / 12.0;
    if months < 12 {
        (1.0 / discount.df(t) - 1.0) / (t * ACT_360)
    } else {
        (1.0 - discount.df(t)) / annuity(discount, months)
    }
}

/// Deposit rate with ACT/360 simple interest.
pub(crate) fn deposit_rate(projection: &ZeroCurve, months: u32) -> f64 {
    let t = months as f64 / 12.0;
    (1.0 / projection.df(t) - 1.0) / (t * ACT_360)
}

pub(crate) fn maturity_months(maturity: f64, max_tenor: f64) -> Result<u32> {
    let m = (maturity * 12.0).round();
    if !(maturity > 0.0) || (maturity * 12.0 - m).abs() > 1e-9 || maturity > max_tenor + 1e-9 {
        return Err(Error::OutOfRange { what: "swap maturity", value: maturity, lo: 0.0, hi: max_tenor });
    }
    Ok(m as u32)
}

/// Value per unit notional, on `shocked`, of the swap struck at par on
/// `base`.
pub fn par_swap_pnl(base: &CurveSet, shocked: &CurveSet, maturity: f64, direction: Direction) -> Result<f64> {
    let months = maturity_months(maturity, base.max_tenor().min(shocked.max_tenor()))?;
    let strike = par_rate(base, months);
    let value = float_leg_pv(shocked, months) - strike * annuity(shocked.discount(), months);
    Ok(direction.sign() * value)
}

#[cfg(test)]
mod tests {
    use super::super::{CurveRole, Regime};
    use super::*;
    use chrono::NaiveDate;

    fn flat(z: f64) -> CurveSet {
        let d = NaiveDate::from_ymd_opt(2014, 1, 2).unwrap();
        let t: Vec<f64> = (1..=30).map(f64::from).collect();
        CurveSet::single(ZeroCurve::new(d, t.clone(), vec![z; 30], CurveRole::Discount).unwrap())
    }

    #[test]
    fn schedules_have_front_stubs() {
        assert_eq!(schedule(30, 12), vec![6, 18, 30]);
        assert_eq!(schedule(12, 3), vec![3, 6, 9, 12]);
        assert_eq!(schedule(3, 12), vec![3]);
    }

    #[test]
    fn identity_and_antisymmetry() {
        let b = flat(0.02);
        let s = b.clone();
        assert!(par_swap_pnl(&b, &s, 10.0, Direction::Payer).unwrap().abs() < 1e-15);
        let up = CurveSet::from_tenor_rates(b.as_of(), Regime::MultiCurve, b.discount().pillars(), &[0.021; 30], &[0.002; 30]).unwrap();
        let p = par_swap_pnl(&b, &up, 7.0, Direction::Payer).unwrap();
        let r = par_swap_pnl(&b, &up, 7.0, Direction::Receiver).unwrap();
        assert_eq!(p, -r);
        assert!(par_swap_pnl(&b, &up, 31.0, Direction::Payer).is_err());
        assert!(par_swap_pnl(&b, &up, 0.0, Direction::Payer).is_err());
    }

    #[test]
    fn one_bp_parallel_matches_annuity_by_direct_summation() {
        let b = flat(1.02f64.ln());
        let s = CurveSet::single(b.discount().shifted(1e-4).unwrap());
        let pnl = par_swap_pnl(&b, &s, 10.0, Direction::Payer).unwrap();
        // independent cash-flow sum on continuous compounding
        let z0 = b.discount().zero_rates()[0];
        let ann: f64 = (1..=10).map(|k| (-(z0 + 1e-4) * k as f64).exp()).sum();
        let fixed_rate = (1.0 - (-z0 * 10.0f64).exp()) / (1..=10).map(|k| (-z0 * k as f64).exp()).sum::<f64>();
        let direct = (1.0 - (-(z0 + 1e-4) * 10.0f64).exp()) - fixed_rate * ann;
        assert!((pnl - direct).abs() < 1e-12);
        // base-curve annuity; a continuous 1bp is about 1.02bp annual here
        let approx = annuity(b.discount(), 120) * 1e-4;
        assert!((pnl - approx).abs() / approx < 0.02, "{pnl} vs {approx}");
    }

    #[test]
    fn monotone_in_parallel_shock() {
        let b = flat(0.02);
        let mut last = f64::NEG_INFINITY;
        for k in -5..=5 {
            let s = CurveSet::single(b.discount().shifted(k as f64 * 5e-4).unwrap());
            let v = par_swap_pnl(&b, &s, 10.0, Direction::Payer).unwrap();
            assert!(v > last);
            last = v;
        }
    }
}
