//! Zero curves bootstrapped from OIS, deposit and Libor swap quotes, and
//! par-swap repricing under shocked curves.
//!
//! Interpolation is linear in log discount factor between pillars, anchored
//! at `df(0) = 1`, with the last forward rate held flat beyond the final
//! pillar.

mod bootstrap;
mod brent;
mod swap;

pub use bootstrap::{bootstrap, bootstrap_row, reprice};
pub use brent::brent;
pub use swap::{annuity, float_leg_pv, ois_par_rate, par_rate, par_swap_pnl, Direction};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tenor grid of the swap SVAR tables, in years.
pub const SWAP_TENORS: [f64; 15] = [0.25, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 15.0, 20.0, 25.0, 30.0];

const TENOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveRole {
    Discount,
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SingleCurve,
    MultiCurve,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-curve" | "single" => Ok(Regime::SingleCurve),
            "multi-curve" | "multi" => Ok(Regime::MultiCurve),
            _ => Err(Error::config("regime", format!("unknown regime {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurve {
    as_of: NaiveDate,
    pillars: Vec<f64>,
    zero_rates: Vec<f64>,
    role: CurveRole,
}

impl ZeroCurve {
    pub fn new(as_of: NaiveDate, pillars: Vec<f64>, zero_rates: Vec<f64>, role: CurveRole) -> Result<Self> {
        if pillars.is_empty() || pillars.len() != zero_rates.len() {
            return Err(Error::InsufficientData { what: "curve pillars", needed: 1, got: pillars.len().min(zero_rates.len()) });
        }
        if !(pillars[0] > 0.0) || pillars.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("pillars", "must be positive and strictly increasing"));
        }
        for (t, z) in pillars.iter().zip(&zero_rates) {
            let df = (-z * t).exp();
            if !z.is_finite() || !(df > 0.0 && df <= 2.0) {
                return Err(Error::OutOfRange { what: "discount factor", value: df, lo: 0.0, hi: 2.0 });
            }
        }
        Ok(ZeroCurve { as_of, pillars, zero_rates, role })
    }

    pub(crate) fn unchecked(as_of: NaiveDate, pillars: Vec<f64>, zero_rates: Vec<f64>, role: CurveRole) -> Self {
        ZeroCurve { as_of, pillars, zero_rates, role }
    }

    pub fn as_of(&self) -> NaiveDate {
        self.as_of
    }

    pub fn pillars(&self) -> &[f64] {
        &self.pillars
    }

    pub fn zero_rates(&self) -> &[f64] {
        &self.zero_rates
    }

    pub fn role(&self) -> CurveRole {
        self.role
    }

    pub fn max_tenor(&self) -> f64 {
        self.pillars[self.pillars.len() - 1]
    }

    fn log_df(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.pillars.len();
        let node = |i: usize| -self.zero_rates[i] * self.pillars[i];
        let i = self.pillars.partition_point(|p| *p < t);
        if i == 0 {
            return node(0) * t / self.pillars[0];
        }
        if i < n {
            let (t0, t1) = (self.pillars[i - 1], self.pillars[i]);
            let w = (t - t0) / (t1 - t0);
            return node(i - 1) * (1.0 - w) + node(i) * w;
        }
        let (t0, y0) = if n == 1 { (0.0, 0.0) } else { (self.pillars[n - 2], node(n - 2)) };
        let fwd = (node(n - 1) - y0) / (self.pillars[n - 1] - t0);
        node(n - 1) + fwd * (t - self.pillars[n - 1])
    }

    pub fn df(&self, t: f64) -> f64 {
        self.log_df(t).exp()
    }

    /// Continuously compounded zero rate; the first pillar's rate at `t ≤ 0`.
    pub fn zero(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.zero_rates[0];
        }
        -self.log_df(t) / t
    }

    /// Same pillars with every zero rate moved by `dz`.
    pub fn shifted(&self, dz: f64) -> Result<Self> {
        ZeroCurve::new(self.as_of, self.pillars.clone(), self.zero_rates.iter().map(|z| z + dz).collect(), self.role)
    }

    /// Zero rates sampled at `tenors`, which must lie in `(0, max_tenor]`.
    pub fn rates_at(&self, tenors: &[f64]) -> Result<Vec<f64>> {
        tenors
            .iter()
            .map(|&t| {
                if !(t > 0.0 && t <= self.max_tenor() + TENOR_SLACK) {
                    return Err(Error::OutOfRange { what: "tenor", value: t, lo: 0.0, hi: self.max_tenor() });
                }
                Ok(self.zero(t))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    discount: ZeroCurve,
    projection: Option<ZeroCurve>,
}

impl CurveSet {
    pub fn single(discount: ZeroCurve) -> Self {
        CurveSet { discount, projection: None }
    }

    pub fn multi(discount: ZeroCurve, projection: ZeroCurve) -> Result<Self> {
        if discount.as_of != projection.as_of {
            return Err(Error::config("projection", "as_of differs from the discount curve"));
        }
        Ok(CurveSet { discount, projection: Some(projection) })
    }

    /// Builds curves whose zero rates at `tenors` are the given discount
    /// rates and discount-plus-spread rates.
    pub fn from_tenor_rates(
        as_of: NaiveDate,
        regime: Regime,
        tenors: &[f64],
        discount: &[f64],
        spread: &[f64],
    ) -> Result<Self> {
        let d = ZeroCurve::new(as_of, tenors.to_vec(), discount.to_vec(), CurveRole::Discount)?;
        match regime {
            Regime::SingleCurve => Ok(CurveSet::single(d)),
            Regime::MultiCurve => {
                if spread.len() != discount.len() {
                    return Err(Error::config("spread", "must have one value per tenor"));
                }
                let p: Vec<f64> = discount.iter().zip(spread).map(|(a, b)| a + b).collect();
                CurveSet::multi(d, ZeroCurve::new(as_of, tenors.to_vec(), p, CurveRole::Projection)?)
            }
        }
    }

    pub fn regime(&self) -> Regime {
        if self.projection.is_some() {
            Regime::MultiCurve
        } else {
            Regime::SingleCurve
        }
    }

    pub fn discount(&self) -> &ZeroCurve {
        &self.discount
    }

    /// The projection curve; the discount curve in the single-curve regime.
    pub fn projection(&self) -> &ZeroCurve {
        self.projection.as_ref().unwrap_or(&self.discount)
    }

    pub fn as_of(&self) -> NaiveDate {
        self.discount.as_of
    }

    pub fn max_tenor(&self) -> f64 {
        self.discount.max_tenor().min(self.projection().max_tenor())
    }
}

/// Discount zero rates and projection-minus-discount spreads at `tenors`.
pub fn tenor_rates(cs: &CurveSet, tenors: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = cs.discount.rates_at(tenors)?;
    let s = match &cs.projection {
        None => vec![0.0; tenors.len()],
        Some(p) => p.rates_at(tenors)?.iter().zip(&d).map(|(a, b)| a - b).collect(),
    };
    Ok((d, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2014, 1, 2).unwrap()
    }

    #[test]
    fn interpolation_reproduces_pillars_and_extrapolates_flat_forward() {
        let c = ZeroCurve::new(day(), vec![1.0, 2.0], vec![0.01, 0.02], CurveRole::Discount).unwrap();
        assert!((c.zero(1.0) - 0.01).abs() < 1e-15);
        assert!((c.zero(2.0) - 0.02).abs() < 1e-15);
        // forward between 1 and 2 is 3%; held beyond 2
        let f = c.log_df(2.0) - c.log_df(3.0);
        assert!((f - 0.03).abs() < 1e-14);
        assert!((c.zero(0.5) - 0.01).abs() < 1e-15);
        assert_eq!(c.df(0.0), 1.0);
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(ZeroCurve::new(day(), vec![1.0, 1.0], vec![0.01, 0.01], CurveRole::Discount).is_err());
        assert!(ZeroCurve::new(day(), vec![1.0], vec![-1.0], CurveRole::Discount).is_err());
        assert!(ZeroCurve::new(day(), vec![], vec![], CurveRole::Discount).is_err());
    }

    #[test]
    fn single_curve_spreads_vanish() {
        let cs = CurveSet::from_tenor_rates(day(), Regime::SingleCurve, &[1.0, 5.0], &[0.01, 0.02], &[]).unwrap();
        let (d, s) = tenor_rates(&cs, &[0.25, 1.0, 3.0, 5.0]).unwrap();
        assert_eq!(s, vec![0.0; 4]);
        assert!((d[1] - 0.01).abs() < 1e-15);
        assert!(tenor_rates(&cs, &[6.0]).is_err());
    }
}
