use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::quantile::{es_sorted, sorted, var_sorted};
use super::RiskConfig;
use crate::cleaning::{detect_with_reference, normal_reference, repair_outliers, CleaningConfig};
use crate::datamodel::absolute_diffs;
use crate::error::{Error, Result};
use crate::exec::try_map_range;
use crate::series::TimeSeries;

/// Below this VAR relative change the ratio falls back to the ES change.
pub const SENSITIVITY_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    /// Last date of the window.
    pub date: NaiveDate,
    pub var_change: f64,
    pub es_change: f64,
    /// ES change over VAR change, or the ES change alone when
    /// `es_only` is set.
    pub combined: f64,
    pub es_only: bool,
    pub flagged: bool,
}

fn rel_change(clean: f64, dirty: f64) -> f64 {
    if clean == dirty {
        0.0
    } else {
        (clean - dirty).abs() / dirty.abs()
    }
}

/// For every window of `window_days + holding_days` observations ending on
/// each date: VAR and ES of absolute-shock losses on the raw window and on
/// the window after detection and repair, and their relative changes.
pub fn rolling_clean_sensitivity(
    raw: &TimeSeries,
    cfg_clean: &CleaningConfig,
    cfg_risk: &RiskConfig,
) -> Result<Vec<SensitivityPoint>> {
    cfg_clean.validate()?;
    cfg_risk.validate()?;
    let values = raw.complete_values()?;
    let len = cfg_risk.window_days + cfg_risk.holding_days;
    if values.len() < len {
        return Err(Error::InsufficientData { what: "observations for a rolling window", needed: len, got: values.len() });
    }
    // windows share one length, so one reference simulation serves them all
    let reference = normal_reference(len - 1, cfg_clean, 0)?;
    let m = cfg_risk.holding_days;
    let metrics = |v: &[f64]| -> Result<(f64, f64)> {
        let losses: Vec<f64> = absolute_diffs(v, m)?.into_iter().map(|d| -d).collect();
        let s = sorted(&losses);
        Ok((var_sorted(&s, cfg_risk.alpha), es_sorted(&s, cfg_risk.beta)))
    };
    try_map_range(cfg_risk.exec, values.len() + 1 - len, |k| {
        let win = TimeSeries::from_parts(raw.id(), raw.dates()[k..k + len].to_vec(), values[k..k + len].iter().map(|v| Some(*v)).collect());
        let (var_d, es_d) = metrics(&values[k..k + len])?;
        let flagged = match detect_with_reference(&win, cfg_clean, &reference) {
            Ok(d) => d.flag,
            Err(Error::Degenerate(_)) | Err(Error::InsufficientData { .. }) => false,
            Err(e) => return Err(e),
        };
        let (var_c, es_c) = if flagged {
            let (cleaned, _) = repair_outliers(&win, cfg_clean)?;
            metrics(&cleaned.complete_values()?)?
        } else {
            (var_d, es_d)
        };
        let var_change = rel_change(var_c, var_d);
        let es_change = rel_change(es_c, es_d);
        let es_only = var_change < SENSITIVITY_EPSILON;
        let combined = if es_only { es_change } else { es_change / var_change };
        Ok(SensitivityPoint { date: raw.dates()[k + len - 1], var_change, es_change, combined, es_only, flagged })
    })
}
