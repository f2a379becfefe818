use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    /// Freeze the polynomial value outside `[domain.0, boundary]`.
    #[default]
    Flat,
    /// Keep evaluating the polynomial.
    Polynomial,
}

/// `a + b·l + c·l²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Coeffs {
    pub fn eval(&self, l: f64) -> f64 {
        self.c * l * l + self.b * l + self.a
    }

    /// Smallest level in `[lo, hi]` where the polynomial is `<= 0`, if any.
    pub fn first_non_positive(&self, lo: f64, hi: f64) -> Option<f64> {
        if self.eval(lo) <= 0.0 {
            return Some(lo);
        }
        let mut roots: Vec<f64> = if self.c == 0.0 {
            if self.b == 0.0 {
                vec![]
            } else {
                vec![-self.a / self.b]
            }
        } else {
            let disc = self.b * self.b - 4.0 * self.c * self.a;
            if disc < 0.0 {
                vec![]
            } else {
                let s = disc.sqrt();
                // numerically stable pair
                let q = -0.5 * (self.b + self.b.signum() * s);
                let mut r = Vec::with_capacity(2);
                if q != 0.0 {
                    r.push(self.a / q);
                    r.push(q / self.c);
                } else {
                    r.push(0.0);
                }
                r
            }
        };
        roots.retain(|r| r.is_finite() && *r >= lo && *r <= hi);
        roots.sort_by(f64::total_cmp);
        // a tangent root still counts: value there is zero
        roots.into_iter().next().or_else(|| (self.eval(hi) <= 0.0).then_some(hi))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Two-sided p-values per fitted coefficient (a, b[, c]).
    pub p_values: Vec<f64>,
    pub fit_window: Option<String>,
}

/// Polynomial map from market level to volatility scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLevelFunction")]
pub struct LevelFunction {
    pub degree: u8,
    pub coeffs: Coeffs,
    pub domain: (f64, f64),
    /// Upper freeze point for flat extrapolation; defaults to `domain.1`.
    pub boundary: f64,
    pub extrapolation: Extrapolation,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

#[derive(Deserialize)]
struct RawLevelFunction {
    degree: u8,
    coeffs: Coeffs,
    domain: (f64, f64),
    boundary: Option<f64>,
    #[serde(default)]
    extrapolation: Extrapolation,
    #[serde(default)]
    diagnostics: Diagnostics,
}

impl TryFrom<RawLevelFunction> for LevelFunction {
    type Error = Error;

    fn try_from(r: RawLevelFunction) -> Result<Self> {
        let mut f = LevelFunction::new(r.degree, r.coeffs, r.domain)?;
        f.extrapolation = r.extrapolation;
        f.diagnostics = r.diagnostics;
        if let Some(b) = r.boundary {
            f = f.with_boundary(b)?;
        }
        Ok(f)
    }
}

impl LevelFunction {
    pub fn new(degree: u8, coeffs: Coeffs, domain: (f64, f64)) -> Result<Self> {
        match degree {
            1 if coeffs.c != 0.0 => return Err(Error::config("coeffs.c", "must be 0 for a degree-1 level function")),
            1 | 2 => {}
            _ => return Err(Error::config("degree", format!("{degree} is not 1 or 2"))),
        }
        if ![coeffs.a, coeffs.b, coeffs.c].iter().all(|x| x.is_finite()) {
            return Err(Error::config("coeffs", "must be finite"));
        }
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config("domain", format!("need finite lo < hi, got ({lo}, {hi})")));
        }
        if let Some(level) = coeffs.first_non_positive(lo, hi) {
            return Err(Error::NonPositiveScale { level });
        }
        Ok(LevelFunction {
            degree,
            coeffs,
            domain,
            boundary: hi,
            extrapolation: Extrapolation::Flat,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn linear(a: f64, b: f64, domain: (f64, f64)) -> Result<Self> {
        Self::new(1, Coeffs { a, b, c: 0.0 }, domain)
    }

    pub fn quadratic(a: f64, b: f64, c: f64, domain: (f64, f64)) -> Result<Self> {
        Self::new(2, Coeffs { a, b, c }, domain)
    }

    pub fn with_extrapolation(mut self, e: Extrapolation) -> Self {
        self.extrapolation = e;
        self
    }

    pub fn with_boundary(mut self, boundary: f64) -> Result<Self> {
        if !(boundary.is_finite() && boundary > self.domain.0) {
            return Err(Error::config("boundary", format!("{boundary} must exceed the domain minimum {}", self.domain.0)));
        }
        if let Some(level) = self.coeffs.first_non_positive(self.domain.0, boundary) {
            return Err(Error::NonPositiveScale { level });
        }
        self.boundary = boundary;
        Ok(self)
    }

    /// Raw polynomial value, ignoring the extrapolation rule.
    pub fn polynomial(&self, level: f64) -> f64 {
        self.coeffs.eval(level)
    }

    /// Scale at `level`, honouring the extrapolation rule.
    pub fn value(&self, level: f64) -> f64 {
        match self.extrapolation {
            Extrapolation::Flat => self.coeffs.eval(level.clamp(self.domain.0, self.boundary)),
            Extrapolation::Polynomial => self.coeffs.eval(level),
        }
    }
}

/// Ratio of the level function at the use-side level to the observation-side
/// level. The linear form uses the same polynomial in numerator and
/// denominator.
pub fn level_scale(f: &LevelFunction, l_obs: f64, l_now: f64) -> Result<f64> {
    let num = f.value(l_now);
    if num <= 0.0 || !num.is_finite() {
        return Err(Error::NonPositivePolynomial { level: l_now, value: num });
    }
    let den = f.value(l_obs);
    if den <= 0.0 || !den.is_finite() {
        return Err(Error::NonPositivePolynomial { level: l_obs, value: den });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_exactly_one() {
        let f = LevelFunction::quadratic(0.1, -1.0, 5.0, (0.0, 0.15)).unwrap();
        for l in [0.0, 0.013, 0.05, 0.15, 0.3] {
            assert_eq!(level_scale(&f, l, l).unwrap(), 1.0);
        }
    }

    #[test]
    fn linear_through_origin_doubles() {
        let f = LevelFunction::linear(0.0, 1.0, (0.001, 0.2)).unwrap();
        assert_eq!(level_scale(&f, 0.02, 0.04).unwrap(), 2.0);
    }

    #[test]
    fn quadratic_ratio_matches_direct_evaluation() {
        let f = LevelFunction::quadratic(1.0, 2.0, 3.0, (0.0, 0.1)).unwrap();
        let direct = (3.0 * 0.02f64.powi(2) + 2.0 * 0.02 + 1.0) / (3.0 * 0.05f64.powi(2) + 2.0 * 0.05 + 1.0);
        let got = level_scale(&f, 0.05, 0.02).unwrap();
        assert!((got - direct).abs() <= 1e-15 * direct);
    }

    #[test]
    fn non_positive_polynomial_is_an_error() {
        let f = LevelFunction::linear(1.0, -10.0, (0.0, 0.05))
            .unwrap()
            .with_extrapolation(Extrapolation::Polynomial);
        assert!(matches!(level_scale(&f, 0.02, 0.2), Err(Error::NonPositivePolynomial { .. })));
        // flat extrapolation freezes at the boundary and stays positive
        let g = f.clone().with_extrapolation(Extrapolation::Flat);
        assert_eq!(g.value(0.2), g.polynomial(0.05));
        assert!(level_scale(&g, 0.02, 0.2).is_ok());
    }

    #[test]
    fn constructor_checks_positivity_and_degree() {
        assert!(matches!(
            LevelFunction::quadratic(1.0, 0.0, -1.0, (0.0, 2.0)),
            Err(Error::NonPositiveScale { level }) if (level - 1.0).abs() < 1e-15
        ));
        assert!(LevelFunction::new(1, Coeffs { a: 1.0, b: 0.0, c: 1.0 }, (0.0, 1.0)).is_err());
        assert!(LevelFunction::new(3, Coeffs { a: 1.0, b: 0.0, c: 0.0 }, (0.0, 1.0)).is_err());
        assert!(LevelFunction::linear(1.0, 0.0, (0.1, 0.1)).is_err());
    }

    #[test]
    fn json_round_trip_validates() {
        let f = LevelFunction::quadratic(0.12, -1.2, 5.0, (0.0, 0.15)).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: LevelFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let bad = s.replace("\"degree\":2", "\"degree\":7");
        assert!(serde_json::from_str::<LevelFunction>(&bad).is_err());
    }
}
