//! Gap filling, bad-data detection and repair for instrument panels and
//! single series, with every alteration recorded in a [`ChangeLog`].
//!
//! Monte-Carlo draws use ChaCha8 seeded from [`CleaningConfig::rng_seed`];
//! each instrument of a panel gets its own substream (its column index), so
//! parallel and sequential runs agree bit for bit.

mod changelog;
mod detect;
mod fill;
mod monotone;
mod repair;
mod spikes;

pub use changelog::{Action, Change, ChangeLog};
pub use detect::{
    detect_bad_data, detect_bad_data_on_stream, detect_with_reference, normal_reference, sd_trim_ratio, Detection,
    NormalReference, MIN_DETECTION_RUN,
};
pub use fill::{fill_curve_date, fill_curve_dates, fill_time_gaps, GapFill};
pub use monotone::MonotoneCubic;
pub use repair::{outlier_threshold, repair_outliers, repair_outliers_with_threshold};
pub use spikes::{clean_spikes, is_spike};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::panel::InstrumentPanel;
use crate::series::TimeSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleaningConfig {
    #[serde(default = "defaults::trim_fraction")]
    pub trim_fraction: f64,
    #[serde(default = "defaults::mc_trials")]
    pub mc_trials: usize,
    #[serde(default = "defaults::threshold_sds")]
    pub threshold_sds: f64,
    #[serde(default = "defaults::max_time_gap_days")]
    pub max_time_gap_days: usize,
    #[serde(default = "defaults::spike_max_width_days")]
    pub spike_max_width_days: usize,
    #[serde(default = "defaults::spike_return_tolerance")]
    pub spike_return_tolerance: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub exec: Exec,
}

mod defaults {
    pub fn trim_fraction() -> f64 {
        0.03
    }
    pub fn mc_trials() -> usize {
        256
    }
    pub fn threshold_sds() -> f64 {
        5.0
    }
    pub fn max_time_gap_days() -> usize {
        2
    }
    pub fn spike_max_width_days() -> usize {
        5
    }
    pub fn spike_return_tolerance() -> f64 {
        0.10
    }
}

impl CleaningConfig {
    pub fn new(rng_seed: u64) -> Self {
        CleaningConfig {
            trim_fraction: defaults::trim_fraction(),
            mc_trials: defaults::mc_trials(),
            threshold_sds: defaults::threshold_sds(),
            max_time_gap_days: defaults::max_time_gap_days(),
            spike_max_width_days: defaults::spike_max_width_days(),
            spike_return_tolerance: defaults::spike_return_tolerance(),
            rng_seed,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.trim_fraction > 0.0 && self.trim_fraction < 1.0) {
            return Err(Error::config("trim_fraction", "must lie strictly between 0 and 1"));
        }
        if self.mc_trials < 1 {
            return Err(Error::config("mc_trials", "must be at least 1"));
        }
        if !(self.threshold_sds > 0.0 && self.threshold_sds.is_finite()) {
            return Err(Error::config("threshold_sds", "must be positive"));
        }
        if self.spike_max_width_days < 1 {
            return Err(Error::config("spike_max_width_days", "must be at least 1"));
        }
        if !(self.spike_return_tolerance > 0.0 && self.spike_return_tolerance.is_finite()) {
            return Err(Error::config("spike_return_tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Outcome of the bad-data test for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum DetectionOutcome {
    Flagged { observed_ratio: f64, threshold: f64 },
    Clean { observed_ratio: f64, threshold: f64 },
    /// Too short or degenerate for the test; left unrepaired.
    Skipped { reason: String },
}

impl DetectionOutcome {
    pub fn is_flagged(&self) -> bool {
        matches!(self, DetectionOutcome::Flagged { .. })
    }

    fn from_result(r: Result<Detection>) -> Result<Self> {
        match r {
            Ok(d) if d.flag => Ok(DetectionOutcome::Flagged { observed_ratio: d.observed_ratio, threshold: d.threshold }),
            Ok(d) => Ok(DetectionOutcome::Clean { observed_ratio: d.observed_ratio, threshold: d.threshold }),
            Err(e @ (Error::InsufficientData { .. } | Error::Degenerate(_))) => {
                Ok(DetectionOutcome::Skipped { reason: e.to_string() })
            }
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CleanedSeries {
    pub series: TimeSeries,
    pub log: ChangeLog,
    pub detection: DetectionOutcome,
}

/// Detection on `stream`, repair if flagged, then optionally the spike
/// cleaner.
pub fn clean_series_on_stream(
    ts: &TimeSeries,
    cfg: &CleaningConfig,
    stream: u32,
    spikes: bool,
) -> Result<CleanedSeries> {
    cfg.validate()?;
    let detection = DetectionOutcome::from_result(detect_bad_data_on_stream(ts, cfg, stream))?;
    let (mut series, mut log) = if detection.is_flagged() {
        repair_outliers(ts, cfg)?
    } else {
        (ts.clone(), ChangeLog::new())
    };
    if spikes {
        let (s, l) = clean_spikes(&series, cfg)?;
        series = s;
        log.append(l);
    }
    Ok(CleanedSeries { series, log, detection })
}

pub fn clean_series(ts: &TimeSeries, cfg: &CleaningConfig, spikes: bool) -> Result<CleanedSeries> {
    clean_series_on_stream(ts, cfg, 0, spikes)
}

#[derive(Debug, Clone)]
pub struct CleanedPanel {
    pub panel: InstrumentPanel,
    pub log: ChangeLog,
    /// One entry per instrument, in column order.
    pub detections: Vec<(String, DetectionOutcome)>,
    /// Instruments with no quote at all, left missing.
    pub all_missing: Vec<String>,
}

/// Curve interpolation, time filling and extrapolation, then per-instrument
/// detection and repair. CDS columns skip the curve steps.
pub fn clean_panel(panel: &InstrumentPanel, cfg: &CleaningConfig, spikes: bool) -> Result<CleanedPanel> {
    cfg.validate()?;
    let (curved, mut log) = fill_curve_dates(panel)?;
    let filled = fill_time_gaps(&curved, cfg)?;
    log.append(filled.log);
    let mut out = filled.panel;
    let cols = out.instruments().len();
    let results = map_range(cfg.exec, cols, |c| clean_series_on_stream(&out.series(c), cfg, c as u32, spikes));
    let mut detections = Vec::with_capacity(cols);
    for (c, r) in results.into_iter().enumerate() {
        let r = r?;
        let id = out.instruments()[c].id();
        if !r.log.is_empty() {
            out.set_column(c, r.series.values());
            log.append(r.log);
        }
        detections.push((id, r.detection));
    }
    Ok(CleanedPanel { panel: out, log, detections, all_missing: filled.all_missing })
}
