//! Beta-Binomial stability model.
//!
//! Each trial is a Bernoulli outcome: "success" when the detector returns a
//! partition not seen before. The posterior over the success probability
//! drives the stopping rule, and one-vs-rest Beta posteriors give the
//! frequency estimate of every individual solution.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Absolute tolerance of [`beta_quantile`].
pub const QUANTILE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PStableVariant {
    /// Posterior predictive probability that the next trial is not new:
    /// `1 - (ns + a) / (t + a + b)`.
    #[default]
    Corrected,
    /// `1 - E[Beta(t + 2, t - ns + 2)]`, kept for comparison with the
    /// original formulation. Never exceeds 0.5.
    #[serde(rename = "paper_verbatim")]
    Verbatim,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBinomialModel {
    pub t: u64,
    pub ns: u64,
    pub prior_alpha: f64,
    pub prior_beta: f64,
}

impl Default for BetaBinomialModel {
    fn default() -> Self {
        Self::new(1.0, 1.0).expect("uniform prior")
    }
}

impl BetaBinomialModel {
    pub fn new(prior_alpha: f64, prior_beta: f64) -> Result<Self> {
        if !(prior_alpha > 0.0 && prior_beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "prior parameters must be positive, got ({prior_alpha}, {prior_beta})"
            )));
        }
        Ok(Self {
            t: 0,
            ns: 0,
            prior_alpha,
            prior_beta,
        })
    }

    /// Records one trial.
    #[must_use]
    pub fn update(self, is_new_solution: bool) -> Self {
        Self {
            t: self.t + 1,
            ns: self.ns + u64::from(is_new_solution),
            ..self
        }
    }

    pub fn p_stable(&self, variant: PStableVariant) -> f64 {
        debug_assert!(self.ns <= self.t);
        let t = self.t as f64;
        let ns = self.ns as f64;
        match variant {
            PStableVariant::Corrected => {
                1.0 - (ns + self.prior_alpha) / (t + self.prior_alpha + self.prior_beta)
            }
            PStableVariant::Verbatim => {
                let a = t + 2.0;
                let b = t - ns + 2.0;
                1.0 - a / (a + b)
            }
        }
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta parameters must be positive, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "x must lie in [0, 1], got {x}"
        )));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    // the continued fraction converges fast below the mean-ish split point
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - incomplete_beta_cf(b, a, 1.0 - x))
    } else {
        Ok(incomplete_beta_cf(a, b, x))
    }
}

/// Modified Lentz evaluation of the continued fraction for `I_x(a, b)`.
fn incomplete_beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;

    let ln_front = a * x.ln() + b * (1.0 - x).ln() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
    let front = ln_front.exp() / a;

    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    front * h
}

/// The `q`-quantile of `Beta(alpha, beta)`, found by bisection on `I_x`.
pub fn beta_quantile(alpha: f64, beta: f64, q: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta parameters must be positive, got ({alpha}, {beta})"
        )));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in [0, 1], got {q}"
        )));
    }
    if q == 0.0 || q == 1.0 {
        return Ok(q);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // a hundredfold margin under the advertised tolerance
    while hi - lo > QUANTILE_TOLERANCE * 1e-2 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if regularized_incomplete_beta(alpha, beta, mid)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionEstimate {
    pub count: u64,
    pub p_point: f64,
    pub p_lower: f64,
    pub p_upper: f64,
}

/// Point and equal-tailed interval estimates of each solution's frequency
/// from its marginal posterior `Beta(c + 1, t - c + 1)`.
pub fn solution_estimates(counts: &[u64], t: u64, level: f64) -> Result<Vec<SolutionEstimate>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "credible level must lie in (0, 1), got {level}"
        )));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("no trials to estimate from".into()));
    }
    if let Some(&c) = counts.iter().find(|&&c| c > t) {
        return Err(Error::InvalidParameter(format!(
            "count {c} exceeds {t} trials"
        )));
    }
    if counts.iter().sum::<u64>() > t {
        return Err(Error::InvalidParameter(format!(
            "counts sum to more than {t} trials"
        )));
    }
    let tail = (1.0 - level) / 2.0;
    counts
        .iter()
        .map(|&count| {
            let a = count as f64 + 1.0;
            let b = (t - count) as f64 + 1.0;
            Ok(SolutionEstimate {
                count,
                p_point: a / (a + b),
                p_lower: beta_quantile(a, b, tail)?,
                p_upper: beta_quantile(a, b, 1.0 - tail)?,
            })
        })
        .collect()
}
