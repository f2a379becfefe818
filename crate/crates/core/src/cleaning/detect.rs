//! Evidence-of-bad-data test: how much does the standard deviation of
//! daily differences drop when the largest few are removed, compared with
//! what a standard normal sample of the same size does?

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::CleaningConfig;
use crate::error::{Error, Result};
use crate::exec::map_range;
use crate::series::TimeSeries;

pub const MIN_DETECTION_RUN: usize = 30;
const MIN_TRIM_SAMPLE: usize = 10;

fn population_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// `SD(all) / SD(some)` where `SD(some)` drops the `ceil(trim·n)` largest
/// absolute differences. Both are population standard deviations.
pub fn sd_trim_ratio(diffs: &[f64], trim_fraction: f64) -> Result<f64> {
    if diffs.len() < MIN_TRIM_SAMPLE {
        return Err(Error::InsufficientData { what: "differences for the trim ratio", needed: MIN_TRIM_SAMPLE, got: diffs.len() });
    }
    if !(trim_fraction > 0.0 && trim_fraction < 1.0) {
        return Err(Error::OutOfRange { what: "trim_fraction", value: trim_fraction, lo: 0.0, hi: 1.0 });
    }
    let n = diffs.len();
    let drop = ((trim_fraction * n as f64).ceil() as usize).min(n - 2);
    let mut order: Vec<usize> = (0..n).collect();
    // largest magnitude first; ties broken by position for determinism
    order.sort_by(|&i, &j| diffs[j].abs().total_cmp(&diffs[i].abs()).then(i.cmp(&j)));
    let kept: Vec<f64> = order[drop..].iter().map(|&i| diffs[i]).collect();
    let some = population_sd(&kept);
    if some == 0.0 || !some.is_finite() {
        return Err(Error::Degenerate("standard deviation after trimming is zero"));
    }
    Ok(population_sd(diffs) / some)
}

/// Daily differences between adjacent present observations, and the
/// length of the longest gap-free run.
pub(crate) fn present_diffs(ts: &TimeSeries) -> (Vec<f64>, usize) {
    let v = ts.values();
    let mut diffs = Vec::new();
    let (mut run, mut best) = (0usize, 0usize);
    for i in 0..v.len() {
        match v[i] {
            Some(_) => {
                run += 1;
                best = best.max(run);
                if i > 0 {
                    if let (Some(a), Some(b)) = (v[i - 1], v[i]) {
                        diffs.push(b - a);
                    }
                }
            }
            None => run = 0,
        }
    }
    (diffs, best)
}

/// Reference distribution of the trim ratio under standard normal
/// differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalReference {
    pub mean: f64,
    pub sd: f64,
    pub threshold: f64,
}

/// Simulates `cfg.mc_trials` standard normal samples of `n` differences.
/// Trial `t` draws from ChaCha8 seeded with `cfg.rng_seed` on stream
/// `(stream << 32) | t`, so results do not depend on thread scheduling.
pub fn normal_reference(n: usize, cfg: &CleaningConfig, stream: u32) -> Result<NormalReference> {
    cfg.validate()?;
    let ratios = map_range(cfg.exec, cfg.mc_trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(((stream as u64) << 32) | t as u64);
        let sample: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        sd_trim_ratio(&sample, cfg.trim_fraction)
    });
    let ratios: Vec<f64> = ratios.into_iter().collect::<Result<_>>()?;
    let k = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / k;
    let sd = if ratios.len() > 1 {
        (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(NormalReference { mean, sd, threshold: mean + cfg.threshold_sds * sd })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub flag: bool,
    pub observed_ratio: f64,
    pub threshold: f64,
}

pub fn detect_bad_data(ts: &TimeSeries, cfg: &CleaningConfig) -> Result<Detection> {
    detect_bad_data_on_stream(ts, cfg, 0)
}

/// [`detect_bad_data`] with an explicit random substream, used to give
/// each instrument of a panel its own simulation.
pub fn detect_bad_data_on_stream(ts: &TimeSeries, cfg: &CleaningConfig, stream: u32) -> Result<Detection> {
    let (diffs, run) = present_diffs(ts);
    if run < MIN_DETECTION_RUN {
        return Err(Error::InsufficientData { what: "contiguous observations for detection", needed: MIN_DETECTION_RUN, got: run });
    }
    let observed_ratio = sd_trim_ratio(&diffs, cfg.trim_fraction)?;
    let reference = normal_reference(diffs.len(), cfg, stream)?;
    Ok(Detection { flag: observed_ratio > reference.threshold, observed_ratio, threshold: reference.threshold })
}

/// Detection against a precomputed reference; the reference must have been
/// simulated for the same number of differences.
pub fn detect_with_reference(ts: &TimeSeries, cfg: &CleaningConfig, reference: &NormalReference) -> Result<Detection> {
    let (diffs, run) = present_diffs(ts);
    if run < MIN_DETECTION_RUN {
        return Err(Error::InsufficientData { what: "contiguous observations for detection", needed: MIN_DETECTION_RUN, got: run });
    }
    let observed_ratio = sd_trim_ratio(&diffs, cfg.trim_fraction)?;
    Ok(Detection { flag: observed_ratio > reference.threshold, observed_ratio, threshold: reference.threshold })
}
