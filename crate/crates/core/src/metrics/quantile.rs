use crate::error::{Error, Result};

/// 1-based rank of the smallest order statistic whose empirical CDF reaches
/// `p`, i.e. the smallest `k` with `k / n >= p`.
pub fn cdf_rank(n: usize, p: f64) -> usize {
    debug_assert!(n > 0);
    let nf = n as f64;
    let mut k = ((p * nf).ceil() as usize).clamp(1, n);
    // ceil(p·n) can be off by one when p·n rounds across an integer
    while k > 1 && ((k - 1) as f64) / nf >= p {
        k -= 1;
    }
    while k < n && (k as f64) / nf < p {
        k += 1;
    }
    k
}

fn check(values: &[f64], p: f64, what: &'static str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange { what, value: p, lo: 0.0, hi: 1.0 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("losses", "must be finite"));
    }
    Ok(())
}

pub(crate) fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Smallest sample value `x` with empirical `CDF(x) >= alpha`.
pub fn var(losses: &[f64], alpha: f64) -> Result<f64> {
    check(losses, alpha, "alpha")?;
    Ok(var_sorted(&sorted(losses), alpha))
}

pub(crate) fn var_sorted(sorted: &[f64], alpha: f64) -> f64 {
    sorted[cdf_rank(sorted.len(), alpha) - 1]
}

/// Tail expectation: the exact integral of the empirical quantile function
/// over `[beta, 1]`, divided by `1 − beta`. With `k = (1 − beta)·n` this is
/// the sum of the `⌊k⌋` largest losses plus `(k − ⌊k⌋)` times the next one,
/// over `k`.
pub fn es(losses: &[f64], beta: f64) -> Result<f64> {
    check(losses, beta, "beta")?;
    Ok(es_sorted(&sorted(losses), beta))
}

/// Written as `VAR(beta)` plus the mean excess of the losses above it, so
/// rounding can never push ES below VAR.
pub(crate) fn es_sorted(sorted: &[f64], beta: f64) -> f64 {
    let n = sorted.len();
    let rank = cdf_rank(n, beta);
    let v = sorted[rank - 1];
    let k = (1.0 - beta) * n as f64;
    let excess: f64 = sorted[rank..].iter().map(|x| x - v).sum();
    v + excess / k
}
