//! Volatility versus level: bucketed standard deviations of moves by
//! starting level, polynomial fits with significance statistics, and
//! standardized VAR/ES lookup tables by tenor and level.

mod lookup;

pub use lookup::{build_lookup_table, LookupCell, LookupInput, LookupTable, Provenance, LOOKUP_SCHEMA_VERSION};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::datamodel::{Coeffs, Diagnostics, Extrapolation, LevelFunction, ZERO_LEVEL_FLOOR};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub const DEFAULT_BUCKET_BP: f64 = 25.0;
pub const DEFAULT_MIN_COUNT: usize = 20;
/// Highest level at which fitted level functions must stay positive.
pub const DEFAULT_MAX_LEVEL: f64 = 0.20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelBucket {
    pub bucket_lo: f64,
    pub bucket_hi: f64,
    pub median_level: f64,
    /// `None` when fewer than two moves start above the zero-level floor.
    pub sd_relative: Option<f64>,
    pub sd_absolute: f64,
    pub count: usize,
    pub thin: bool,
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Buckets independent moves `start[i] → end[i]` by starting level.
pub fn bucket_moves(start: &[f64], end: &[f64], bucket_bp: f64, min_count: usize) -> Result<Vec<LevelBucket>> {
    if !(bucket_bp > 0.0 && bucket_bp.is_finite()) {
        return Err(Error::config("bucket_bp", "must be positive"));
    }
    if start.len() != end.len() {
        return Err(Error::config("moves", "start and end lengths differ"));
    }
    if start.is_empty() {
        return Err(Error::EmptyInput);
    }
    let width = bucket_bp * 1e-4;
    let mut groups: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
    for (i, l) in start.iter().enumerate() {
        if !l.is_finite() || !end[i].is_finite() {
            return Err(Error::config("moves", "must be finite"));
        }
        let mut k = (l / width).floor() as i64;
        // guard against k·width rounding above l
        if (k as f64) * width > *l {
            k -= 1;
        } else if ((k + 1) as f64) * width <= *l {
            k += 1;
        }
        groups.entry(k).or_default().push(i);
    }
    let buckets: Vec<LevelBucket> = groups
        .into_iter()
        .map(|(k, idx)| {
            let mut levels: Vec<f64> = idx.iter().map(|&i| start[i]).collect();
            let abs: Vec<f64> = idx.iter().map(|&i| end[i] - start[i]).collect();
            let rel: Vec<f64> = idx
                .iter()
                .filter(|&&i| start[i].abs() >= ZERO_LEVEL_FLOOR)
                .map(|&i| (end[i] - start[i]) / start[i])
                .collect();
            LevelBucket {
                bucket_lo: k as f64 * width,
                bucket_hi: (k + 1) as f64 * width,
                median_level: median(&mut levels),
                sd_relative: (rel.len() >= 2).then(|| sample_sd(&rel)),
                sd_absolute: sample_sd(&abs),
                count: idx.len(),
                thin: idx.len() < min_count,
            }
        })
        .collect();
    if buckets.iter().all(|b| b.thin) {
        return Err(Error::AllThin { min_count });
    }
    Ok(buckets)
}

/// Overlapping m-day moves of a series, bucketed by starting level.
pub fn bucket_sd(x: &TimeSeries, m: usize, bucket_bp: f64, min_count: usize) -> Result<Vec<LevelBucket>> {
    let v = x.complete_values()?;
    if m == 0 {
        return Err(Error::config("holding_days", "must be at least 1"));
    }
    if v.len() <= m {
        return Err(Error::InsufficientData { what: "series longer than the holding period", needed: m + 1, got: v.len() });
    }
    bucket_moves(&v[..v.len() - m], &v[m..], bucket_bp, min_count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    Unweighted,
    ByCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitTarget {
    #[default]
    Relative,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub degree: u8,
    pub coeffs: Coeffs,
    /// Per fitted coefficient: a, b and, for degree 2, c.
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub residual_sd: f64,
    pub domain: (f64, f64),
    pub points: usize,
    pub target: FitTarget,
    pub weighting: Weighting,
}

/// Least-squares polynomial through the non-thin bucket SDs against their
/// median levels, with t-distribution p-values on `points − parameters`
/// degrees of freedom.
pub fn fit_level_function(buckets: &[LevelBucket], degree: u8, weighting: Weighting, target: FitTarget) -> Result<FitResult> {
    if !(1..=2).contains(&degree) {
        return Err(Error::config("degree", format!("{degree} is not 1 or 2")));
    }
    let pts: Vec<(f64, f64, f64)> = buckets
        .iter()
        .filter(|b| !b.thin)
        .filter_map(|b| {
            let y = match target {
                FitTarget::Relative => b.sd_relative?,
                FitTarget::Absolute => b.sd_absolute,
            };
            let w = match weighting {
                Weighting::Unweighted => 1.0,
                Weighting::ByCount => b.count as f64,
            };
            Some((b.median_level, y, w))
        })
        .collect();
    let p = degree as usize + 1;
    if pts.len() < p + 1 {
        return Err(Error::InsufficientBuckets { needed: p + 1, got: pts.len() });
    }
    let lo = pts.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::SingularDesign);
    }
    let n = pts.len();
    let x = DMatrix::from_fn(n, p, |i, j| pts[i].2.sqrt() * pts[i].0.powi(j as i32));
    let y = DVector::from_fn(n, |i, _| pts[i].2.sqrt() * pts[i].1);
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-13 * scale) {
        return Err(Error::SingularDesign);
    }
    let qty = qr.q().transpose() * &y;
    let beta = r.solve_upper_triangular(&qty).ok_or(Error::SingularDesign)?;
    let resid = &y - &x * &beta;
    let df = (n - p) as f64;
    let s2 = resid.norm_squared() / df;
    let rinv = r.try_inverse().ok_or(Error::SingularDesign)?;
    let cov = &rinv * rinv.transpose() * s2;
    let t_dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let mut std_errors = Vec::with_capacity(p);
    let mut t_stats = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let se = cov[(j, j)].max(0.0).sqrt();
        let b = beta[j];
        let (t, pv) = if se > 0.0 {
            let t = b / se;
            (t, (2.0 * t_dist.cdf(-t.abs())).clamp(0.0, 1.0))
        } else if b == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(b), 0.0)
        };
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(pv);
    }
    // unweighted residual spread of the summary points
    let raw_resid: f64 = pts
        .iter()
        .map(|(l, yv, _)| {
            let fit: f64 = (0..p).map(|j| beta[j] * l.powi(j as i32)).sum();
            (yv - fit).powi(2)
        })
        .sum();
    Ok(FitResult {
        degree,
        coeffs: Coeffs { a: beta[0], b: beta[1], c: if p == 3 { beta[2] } else { 0.0 } },
        std_errors,
        t_stats,
        p_values,
        residual_sd: (raw_resid / df).sqrt(),
        domain: (lo, hi),
        points: n,
        target,
        weighting,
    })
}

/// Level function from a fit, checked positive out to `max_level`
/// (as seen through the extrapolation rule).
pub fn make_level_function(fit: &FitResult, extrapolation: Extrapolation, boundary: f64, max_level: f64) -> Result<LevelFunction> {
    let f = LevelFunction::new(fit.degree, fit.coeffs, fit.domain)?
        .with_boundary(boundary)?
        .with_extrapolation(extrapolation);
    let top = match extrapolation {
        Extrapolation::Polynomial => max_level,
        Extrapolation::Flat => boundary.min(max_level),
    };
    if top > fit.domain.0 {
        if let Some(level) = fit.coeffs.first_non_positive(fit.domain.0, top) {
            return Err(Error::NonPositiveScale { level });
        }
    }
    Ok(LevelFunction { diagnostics: Diagnostics { p_values: fit.p_values.clone(), fit_window: None }, ..f })
}

/// Pointwise `A(l) / B(l)` of the fitted polynomials.
pub fn ratio_curve(a: &FitResult, b: &FitResult, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&l| {
            let den = b.coeffs.eval(l);
            if !(den > 0.0) {
                return Err(Error::DivisionDomain { level: l });
            }
            Ok(a.coeffs.eval(l) / den)
        })
        .collect()
}
