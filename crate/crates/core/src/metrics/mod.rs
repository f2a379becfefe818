//! VAR and ES estimators, stressed reports, the clean-versus-raw
//! sensitivity study and capital aggregation.

pub mod quantile;
mod sensitivity;
mod swap;

pub use quantile::{cdf_rank, es, var};
pub use sensitivity::{rolling_clean_sensitivity, SensitivityPoint, SENSITIVITY_EPSILON};
pub use swap::{swap_svar, tenor_history, SwapSvarInput, TenorHistory};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::datamodel::{apply_shocks, build_distribution, DataModelSpec};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::series::TimeSeries;
use crate::state::MarketState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossSign {
    LossesPositive,
    #[default]
    TwoSided,
}

impl std::str::FromStr for LossSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "losses-positive" => Ok(LossSign::LossesPositive),
            "two-sided" => Ok(LossSign::TwoSided),
            _ => Err(Error::config("loss_sign", format!("unknown value {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_holding")]
    pub holding_days: usize,
    #[serde(default = "default_window")]
    pub window_days: usize,
    #[serde(default)]
    pub loss_sign: LossSign,
    #[serde(default)]
    pub exec: Exec,
}

fn default_alpha() -> f64 {
    0.99
}
fn default_beta() -> f64 {
    0.975
}
fn default_holding() -> usize {
    crate::datamodel::DEFAULT_HOLDING_DAYS
}
fn default_window() -> usize {
    260
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig {
            alpha: default_alpha(),
            beta: default_beta(),
            holding_days: default_holding(),
            window_days: default_window(),
            loss_sign: LossSign::default(),
            exec: Exec::default(),
        }
    }
}

impl RiskConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::OutOfRange { what: name, value: p, lo: 0.0, hi: 1.0 });
            }
        }
        if self.holding_days < 1 {
            return Err(Error::config("holding_days", "must be at least 1"));
        }
        if self.window_days < self.holding_days + 2 {
            return Err(Error::config("window_days", "must be at least holding_days + 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub as_of: NaiveDate,
    /// Probability level of the reported quantile on the P&L or loss axis.
    pub percentile: f64,
    pub var_value: f64,
    pub es_value: f64,
    /// Expected number of observations beyond the quantile, `(1 − p)·n`.
    pub tail_count: f64,
    pub model_id: String,
    pub window: (NaiveDate, NaiveDate),
}

/// Report on a loss sample: VAR at `alpha`, ES at `beta`.
pub fn risk_report(
    losses: &[f64],
    as_of: NaiveDate,
    model_id: &str,
    window: (NaiveDate, NaiveDate),
    cfg: &RiskConfig,
) -> Result<RiskReport> {
    cfg.validate()?;
    Ok(RiskReport {
        as_of,
        percentile: cfg.alpha,
        var_value: var(losses, cfg.alpha)?,
        es_value: es(losses, cfg.beta)?,
        tail_count: (1.0 - cfg.alpha) * losses.len() as f64,
        model_id: model_id.to_string(),
        window,
    })
}

/// Both tails of a scenario P&L distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvarReport {
    /// The `1 − alpha` quantile of P&L and the mean beyond it.
    pub lower: RiskReport,
    /// The `alpha` quantile of P&L and the mean beyond it.
    pub upper: RiskReport,
    pub scenarios: usize,
}

impl SvarReport {
    /// Both tails computed from P&L scenarios. The lower tail mirrors the
    /// upper one: it is minus the upper-tail statistic of `−pnl`.
    pub fn from_pnl(
        pnl: &[f64],
        as_of: NaiveDate,
        model_id: &str,
        window: (NaiveDate, NaiveDate),
        cfg: &RiskConfig,
    ) -> Result<Self> {
        let upper = risk_report(pnl, as_of, model_id, window, cfg)?;
        let neg: Vec<f64> = pnl.iter().map(|v| -v).collect();
        let mirrored = risk_report(&neg, as_of, model_id, window, cfg)?;
        let lower = RiskReport {
            percentile: 1.0 - cfg.alpha,
            var_value: -mirrored.var_value,
            es_value: -mirrored.es_value,
            ..mirrored
        };
        Ok(SvarReport { lower, upper, scenarios: pnl.len() })
    }

    /// The losses-positive view: VAR and ES of `−pnl`.
    pub fn losses(&self) -> RiskReport {
        RiskReport {
            percentile: 1.0 - self.lower.percentile,
            var_value: -self.lower.var_value,
            es_value: -self.lower.es_value,
            ..self.lower.clone()
        }
    }

    pub fn rows(&self, sign: LossSign) -> Vec<RiskReport> {
        match sign {
            LossSign::TwoSided => vec![self.lower.clone(), self.upper.clone()],
            LossSign::LossesPositive => vec![self.losses()],
        }
    }
}

/// Stressed VAR and ES of a single risk factor. Shocks come from
/// `stress_window` of `x` under `spec`; they are applied at `state_use`
/// and P&L is the change in the factor.
pub fn svar_report(
    x: &TimeSeries,
    stress_window: (NaiveDate, NaiveDate),
    spec: &DataModelSpec,
    state_use: MarketState,
    cfg: &RiskConfig,
) -> Result<SvarReport> {
    cfg.validate()?;
    let w = x.window(stress_window.0, stress_window.1)?;
    if w.len() < cfg.window_days {
        return Err(Error::InsufficientData { what: "observations in the stress window", needed: cfg.window_days, got: w.len() });
    }
    let values = w.complete_values()?;
    let dates = w.dates();
    let state_obs = MarketState::new(dates[dates.len() - 1], values[values.len() - 1], dates[0])?;
    let dist = build_distribution(&w, spec, state_obs, state_use)?;
    let sc = apply_shocks(state_use.level, &dist, f64::NEG_INFINITY)?;
    let pnl: Vec<f64> = sc.values.iter().map(|v| v - state_use.level).collect();
    SvarReport::from_pnl(&pnl, state_use.as_of, &spec.id(), (dates[0], dates[dates.len() - 1]), cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapitalMode {
    Sum,
    TwoMax,
}

impl std::str::FromStr for CapitalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(CapitalMode::Sum),
            "two-max" | "twomax" => Ok(CapitalMode::TwoMax),
            _ => Err(Error::config("mode", format!("unknown capital mode {s:?}"))),
        }
    }
}

/// `var + svar`, or twice the larger of the two.
pub fn capital_charge(var_value: f64, svar_value: f64, mode: CapitalMode) -> Result<f64> {
    if !(var_value >= 0.0) {
        return Err(Error::NegativeInput("var_value"));
    }
    if !(svar_value >= 0.0) {
        return Err(Error::NegativeInput("svar_value"));
    }
    Ok(match mode {
        CapitalMode::Sum => var_value + svar_value,
        CapitalMode::TwoMax => 2.0 * var_value.max(svar_value),
    })
}

#[derive(Serialize)]
struct ReportRow<'a> {
    as_of: NaiveDate,
    model_id: &'a str,
    window_start: NaiveDate,
    window_end: NaiveDate,
    percentile: f64,
    var_value: f64,
    es_value: f64,
    tail_count: f64,
}

/// CSV with one row per report.
pub fn reports_to_csv(reports: &[RiskReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(ReportRow {
            as_of: r.as_of,
            model_id: &r.model_id,
            window_start: r.window.0,
            window_end: r.window.1,
            percentile: r.percentile,
            var_value: r.var_value,
            es_value: r.es_value,
            tail_count: r.tail_count,
        })
        .map_err(|e| Error::config("csv", e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::testutil::{bdays, series};

    #[test]
    fn config_validation() {
        assert!(RiskConfig::default().validate().is_ok());
        let c = RiskConfig { window_days: 11, ..RiskConfig::default() };
        assert!(c.validate().is_err());
        let c = RiskConfig { alpha: 1.0, ..RiskConfig::default() };
        assert!(c.validate().is_err());
        let c: RiskConfig = serde_json::from_str(r#"{"alpha":0.95,"loss_sign":"losses-positive"}"#).unwrap();
        assert_eq!((c.alpha, c.beta, c.loss_sign), (0.95, 0.975, LossSign::LossesPositive));
    }

    #[test]
    fn capital_examples() {
        assert_eq!(capital_charge(3.0, 10.0, CapitalMode::Sum).unwrap(), 13.0);
        assert_eq!(capital_charge(3.0, 10.0, CapitalMode::TwoMax).unwrap(), 20.0);
        assert_eq!(capital_charge(10.0, 10.0, CapitalMode::Sum).unwrap(), 20.0);
        assert_eq!(capital_charge(10.0, 10.0, CapitalMode::TwoMax).unwrap(), 20.0);
        assert!(matches!(capital_charge(-1.0, 1.0, CapitalMode::Sum), Err(Error::NegativeInput(_))));
    }

    #[test]
    fn two_max_dominates_on_grid() {
        for i in 0..=40 {
            for j in 0..=40 {
                let (a, b) = (i as f64 * 0.25, j as f64 * 0.25);
                let s = capital_charge(a, b, CapitalMode::Sum).unwrap();
                let t = capital_charge(a, b, CapitalMode::TwoMax).unwrap();
                assert!(t >= s);
                assert_eq!(t == s, i == j);
            }
        }
    }

    #[test]
    fn zero_volatility_window() {
        let x = series(&[0.03; 300]);
        let d = x.dates().to_vec();
        let st = MarketState::new(d[299], 0.03, d[0]).unwrap();
        let r = svar_report(&x, (d[0], d[299]), &DataModelSpec::relative(10).unwrap(), st, &RiskConfig::default()).unwrap();
        assert_eq!((r.lower.var_value, r.upper.var_value), (0.0, 0.0));
        assert_eq!(r.scenarios, 290);
    }

    #[test]
    fn short_window_is_rejected() {
        let x = series(&[0.03; 100]);
        let d = bdays(100);
        let st = MarketState::new(d[99], 0.03, d[0]).unwrap();
        let e = svar_report(&x, (d[0], d[99]), &DataModelSpec::absolute(10).unwrap(), st, &RiskConfig::default());
        assert!(matches!(e, Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let d = bdays(2);
        let r = risk_report(&[1.0, 2.0, 3.0], d[1], "absolute/10d", (d[0], d[1]), &RiskConfig::default()).unwrap();
        let s = reports_to_csv(&[r]).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "as_of,model_id,window_start,window_end,percentile,var_value,es_value,tail_count");
        assert!(lines.next().unwrap().starts_with("2001-01-02,absolute/10d,2001-01-01,2001-01-02,0.99,3.0,3.0,"));
    }
}
