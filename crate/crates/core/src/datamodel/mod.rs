//! Data Models: how cleaned observations become a shock distribution.
//!
//! Three families are supported:
//!
//! * absolute: `Δ_i = x_i − x_{i−m}`
//! * relative: `Δ_i = (x_i − x_{i−m}) / x_{i−m}`
//! * level-relative: the relative difference times `f(l_now) / f(l_i)` where
//!   `f` is a [`LevelFunction`] and `l_i = x_{i−m}` is the level at the start
//!   of each move.
//!
//! Differences are overlapping (stride one), so a year of daily data gives
//! roughly 260 shocks for any holding period.

mod level;

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use level::{level_scale, Coeffs, Diagnostics, Extrapolation, LevelFunction};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::state::{MarketState, ShockDistribution};

/// Relative models refuse denominators smaller than one basis point.
pub const ZERO_LEVEL_FLOOR: f64 = 1e-4;

pub const DEFAULT_HOLDING_DAYS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Absolute,
    Relative,
    LevelRelative,
}

impl ModelKind {
    /// Relative and level-relative shocks are applied multiplicatively.
    pub fn is_multiplicative(self) -> bool {
        !matches!(self, ModelKind::Absolute)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(ModelKind::Absolute),
            "relative" => Ok(ModelKind::Relative),
            "level-relative" => Ok(ModelKind::LevelRelative),
            _ => Err(Error::config("model", format!("unknown data model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct DataModelSpec {
    pub kind: ModelKind,
    pub holding_days: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_function: Option<LevelFunction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: ModelKind,
    #[serde(default = "default_holding")]
    holding_days: usize,
    level_function: Option<LevelFunction>,
}

fn default_holding() -> usize {
    DEFAULT_HOLDING_DAYS
}

impl TryFrom<RawSpec> for DataModelSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        DataModelSpec::new(r.kind, r.holding_days, r.level_function)
    }
}

impl DataModelSpec {
    pub fn new(kind: ModelKind, holding_days: usize, level_function: Option<LevelFunction>) -> Result<Self> {
        if holding_days < 1 {
            return Err(Error::config("holding_days", "must be at least 1"));
        }
        match (kind, &level_function) {
            (ModelKind::LevelRelative, None) => {
                return Err(Error::config("level_function", "required for level-relative models"))
            }
            (ModelKind::Absolute | ModelKind::Relative, Some(_)) => {
                return Err(Error::config("level_function", "only level-relative models take a level function"))
            }
            _ => {}
        }
        Ok(DataModelSpec { kind, holding_days, level_function })
    }

    pub fn absolute(holding_days: usize) -> Result<Self> {
        Self::new(ModelKind::Absolute, holding_days, None)
    }

    pub fn relative(holding_days: usize) -> Result<Self> {
        Self::new(ModelKind::Relative, holding_days, None)
    }

    pub fn level_relative(holding_days: usize, f: LevelFunction) -> Result<Self> {
        Self::new(ModelKind::LevelRelative, holding_days, Some(f))
    }

    /// Stable identifier, e.g. `relative/10d` or
    /// `level-relative[2:0.12,-1.2,5]/10d`.
    pub fn id(&self) -> String {
        let mut s = String::new();
        match self.kind {
            ModelKind::Absolute => s.push_str("absolute"),
            ModelKind::Relative => s.push_str("relative"),
            ModelKind::LevelRelative => {
                let f = self.level_function.as_ref().expect("validated");
                let _ = write!(s, "level-relative[{}:{},{},{}", f.degree, f.coeffs.a, f.coeffs.b, f.coeffs.c);
                if f.extrapolation == Extrapolation::Polynomial {
                    s.push_str(";poly");
                }
                s.push(']');
            }
        }
        let _ = write!(s, "/{}d", self.holding_days);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::config("data_model", e.to_string()))
    }
}

fn check_len(n: usize, m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::config("holding_days", "must be at least 1"));
    }
    if n <= m {
        return Err(Error::InsufficientData { what: "series longer than the holding period", needed: m + 1, got: n });
    }
    Ok(())
}

/// Overlapping absolute m-day differences of a complete value vector.
pub fn absolute_diffs(x: &[f64], m: usize) -> Result<Vec<f64>> {
    check_len(x.len(), m)?;
    Ok((m..x.len()).map(|i| x[i] - x[i - m]).collect())
}

/// Overlapping relative m-day differences. On failure returns the indices of
/// start points below the zero-level floor.
fn relative_diffs_raw(x: &[f64], m: usize) -> std::result::Result<Vec<f64>, Vec<usize>> {
    let bad: Vec<usize> = (m..x.len()).filter(|&i| x[i - m].abs() < ZERO_LEVEL_FLOOR).map(|i| i - m).collect();
    if !bad.is_empty() {
        return Err(bad);
    }
    Ok((m..x.len()).map(|i| (x[i] - x[i - m]) / x[i - m]).collect())
}

pub fn diffs_absolute(x: &TimeSeries, m: usize) -> Result<Vec<f64>> {
    absolute_diffs(&x.complete_values()?, m)
}

pub fn diffs_relative(x: &TimeSeries, m: usize) -> Result<Vec<f64>> {
    let v = x.complete_values()?;
    check_len(v.len(), m)?;
    relative_diffs_raw(&v, m).map_err(|idx| Error::NearZeroDenominator { dates: idx.into_iter().map(|i| x.dates()[i]).collect() })
}

/// Shocks for `values` under `spec`, with `l_now` as the use-side level.
pub fn shocks_for(values: &[f64], spec: &DataModelSpec, l_now: f64) -> Result<Vec<f64>> {
    let m = spec.holding_days;
    check_len(values.len(), m)?;
    match spec.kind {
        ModelKind::Absolute => absolute_diffs(values, m),
        ModelKind::Relative => relative_diffs_raw(values, m).map_err(|_| Error::NearZeroDenominator { dates: vec![] }),
        ModelKind::LevelRelative => {
            let f = spec.level_function.as_ref().expect("validated");
            let rel = relative_diffs_raw(values, m).map_err(|_| Error::NearZeroDenominator { dates: vec![] })?;
            rel.iter()
                .enumerate()
                .map(|(k, r)| Ok(r * level_scale(f, values[k], l_now)?))
                .collect()
        }
    }
}

/// The full transformation from observations and market states to a shock
/// distribution.
pub fn build_distribution(
    x: &TimeSeries,
    spec: &DataModelSpec,
    state_obs: MarketState,
    state_use: MarketState,
) -> Result<ShockDistribution> {
    let values = x.complete_values()?;
    let shocks = match spec.kind {
        ModelKind::Absolute => diffs_absolute(x, spec.holding_days)?,
        ModelKind::Relative => diffs_relative(x, spec.holding_days)?,
        ModelKind::LevelRelative => {
            // surface near-zero errors with dates
            diffs_relative(x, spec.holding_days)?;
            shocks_for(&values, spec, state_use.level)?
        }
    };
    let dates = x.dates();
    let source_window: (NaiveDate, NaiveDate) = (dates[0], dates[dates.len() - 1]);
    Ok(ShockDistribution {
        shocks,
        holding_days: spec.holding_days,
        model: spec.clone(),
        source_window,
        state_observed: state_obs,
        state_used: state_use,
    })
}

/// One shock applied to one current value.
pub fn apply_shock(kind: ModelKind, current: f64, shock: f64) -> f64 {
    if kind.is_multiplicative() {
        current * (1.0 + shock)
    } else {
        current + shock
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenarios {
    pub values: Vec<f64>,
    /// Scenarios strictly below the floor.
    pub breaches: usize,
    pub floor: f64,
}

/// Applies every shock of `dist` to `current`, counting floor breaches.
pub fn apply_shocks(current: f64, dist: &ShockDistribution, floor: f64) -> Result<Scenarios> {
    if !current.is_finite() {
        return Err(Error::config("current_value", "must be finite"));
    }
    let kind = dist.model.kind;
    if kind.is_multiplicative() && current.abs() < ZERO_LEVEL_FLOOR {
        return Err(Error::NearZeroDenominator { dates: vec![dist.state_used.as_of] });
    }
    let values: Vec<f64> = dist.shocks.iter().map(|&s| apply_shock(kind, current, s)).collect();
    let breaches = values.iter().filter(|v| **v < floor).count();
    Ok(Scenarios { values, breaches, floor })
}
