//! Monotonicity-preserving cubic interpolation: C² cubic spline slopes
//! passed through Hyman's filter, evaluated as a cubic Hermite.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing, with at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InsufficientData { what: "interpolation knots", needed: 2, got: n.min(ys.len()) });
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPanel("interpolation abscissae must be strictly increasing".into()));
        }
        let secants: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut slopes = if n == 2 { vec![secants[0]; 2] } else { natural_spline_slopes(&xs, &secants) };
        hyman_filter(&mut slopes, &secants);
        Ok(MonotoneCubic { xs, ys, slopes })
    }

    /// Value at `x`; outside the knot range the end value is returned.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|k| *k <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

/// First derivatives of the natural cubic spline through the knots.
fn natural_spline_slopes(xs: &[f64], s: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0;
    upper[0] = 1.0;
    rhs[0] = 3.0 * s[0];
    for i in 1..n - 1 {
        lower[i] = h[i];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        upper[i] = h[i - 1];
        rhs[i] = 3.0 * (h[i] * s[i - 1] + h[i - 1] * s[i]);
    }
    lower[n - 1] = 1.0;
    diag[n - 1] = 2.0;
    rhs[n - 1] = 3.0 * s[n - 2];
    // Thomas algorithm
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut d = vec![0.0; n];
    d[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        d[i] = (rhs[i] - upper[i] * d[i + 1]) / diag[i];
    }
    d
}

fn hyman_filter(d: &mut [f64], s: &[f64]) {
    let n = d.len();
    let clamp = |d: f64, sign: f64, bound: f64| sign * (sign * d).max(0.0).min(bound);
    d[0] = if s[0] == 0.0 { 0.0 } else { clamp(d[0], s[0].signum(), 3.0 * s[0].abs()) };
    d[n - 1] = if s[n - 2] == 0.0 { 0.0 } else { clamp(d[n - 1], s[n - 2].signum(), 3.0 * s[n - 2].abs()) };
    for i in 1..n - 1 {
        d[i] = if s[i - 1] * s[i] > 0.0 {
            clamp(d[i], s[i].signum(), 3.0 * s[i - 1].abs().min(s[i].abs()))
        } else {
            0.0
        };
    }
}
