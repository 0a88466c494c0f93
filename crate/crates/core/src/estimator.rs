//! Maximum likelihood estimation of the population proportion from a
//! randomized tally, with its exact variance and margins of error.

use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::mechanism::{response_pmf, DesignMatrix};

/// Chebyshev multiplier for a 95% margin of error.
pub const CHEBYSHEV_95: f64 = 4.5;
/// Normal-approximation multiplier for a 95% margin of error.
pub const NORMAL_95: f64 = 1.96;

/// A completed survey: `count_ones` of `n` randomized answers were 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SurveyOutcome {
    n: u64,
    count_ones: u64,
}

impl SurveyOutcome {
    pub fn new(n: u64, count_ones: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sample size n must be at least 1".into(),
            ));
        }
        if count_ones > n {
            return Err(Error::InvalidParameter(format!(
                "count_ones = {count_ones} exceeds sample size n = {n}"
            )));
        }
        Ok(Self { n, count_ones })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn count_ones(&self) -> u64 {
        self.count_ones
    }

    pub fn frequency(&self) -> f64 {
        self.count_ones as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MarginMethod {
    Chebyshev95,
    Normal95,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    pub pi_hat_raw: f64,
    pub pi_hat_clamped: f64,
    /// Proportion at which `variance` was evaluated.
    pub variance_pi: f64,
    pub variance: f64,
    pub moe_chebyshev: f64,
    pub moe_normal: f64,
}

/// The MLE of π. The result is not clamped and may fall outside `[0, 1]`.
pub fn mle_estimate(p: &DesignMatrix, outcome: &SurveyOutcome) -> Result<f64> {
    p.check_nondegenerate()?;
    let d = p.determinant();
    Ok((p.p00() - 1.0) / d + outcome.frequency() / d)
}

/// Exact variance of the MLE at true proportion `pi` with `n` respondents.
pub fn estimator_variance(p: &DesignMatrix, pi: f64, n: u64) -> Result<f64> {
    p.check_nondegenerate()?;
    check_probability("pi", pi)?;
    check_sample_size(n)?;
    Ok(variance_unchecked(p.p00(), p.p11(), pi, n as f64))
}

/// Variance formula on raw coordinates; callers guarantee `p00 + p11 != 1`.
pub(crate) fn variance_unchecked(p00: f64, p11: f64, pi: f64, n: f64) -> f64 {
    let d = p00 + p11 - 1.0;
    let centre = p00 - 0.5 - pi * d;
    // 1/4 - c^2 can round slightly below zero when a response is certain.
    ((0.25 - centre * centre) / (d * d * n)).max(0.0)
}

/// Variance of Warner's estimator with spinner probability `pw`.
pub fn warner_variance(pw: f64, pi: f64, n: u64) -> Result<f64> {
    check_probability("pw", pw)?;
    check_probability("pi", pi)?;
    check_sample_size(n)?;
    let d = 2.0 * pw - 1.0;
    if d.abs() <= crate::mechanism::DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateMechanism { sum: 2.0 * pw });
    }
    let centre = pw - 0.5 - pi * d;
    Ok(((0.25 - centre * centre) / (d * d * n as f64)).max(0.0))
}

pub fn margin_of_error(variance: f64, method: MarginMethod) -> Result<f64> {
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "variance must be non-negative, got {variance}"
        )));
    }
    let k = match method {
        MarginMethod::Chebyshev95 => CHEBYSHEV_95,
        MarginMethod::Normal95 => NORMAL_95,
    };
    Ok(k * variance.sqrt())
}

/// Estimate with variance at `reference_pi`, or at the clamped estimate when
/// no reference is given.
pub fn build_report(
    p: &DesignMatrix,
    outcome: &SurveyOutcome,
    reference_pi: Option<f64>,
) -> Result<EstimateReport> {
    let raw = mle_estimate(p, outcome)?;
    let clamped = raw.clamp(0.0, 1.0);
    let at = reference_pi.unwrap_or(clamped);
    let variance = estimator_variance(p, at, outcome.n())?;
    Ok(EstimateReport {
        pi_hat_raw: raw,
        pi_hat_clamped: clamped,
        variance_pi: at,
        variance,
        moe_chebyshev: margin_of_error(variance, MarginMethod::Chebyshev95)?,
        moe_normal: margin_of_error(variance, MarginMethod::Normal95)?,
    })
}

/// `2xy - x - y + 1 = xy + (1-x)(1-y)`: the chance that two independent coins
/// with heads-probabilities `x` and `y` agree. Non-negative on the unit square,
/// zero only at `(0, 1)` and `(1, 0)`.
pub fn agreement_probability(x: f64, y: f64) -> f64 {
    2.0 * x * y - x - y + 1.0
}

/// Analytic partial derivatives `(∂/∂p00, ∂/∂p11)` of the estimator variance.
/// Both are non-positive whenever `p00 + p11 > 1`.
pub fn variance_gradient(p: &DesignMatrix, pi: f64, n: u64) -> Result<(f64, f64)> {
    p.check_nondegenerate()?;
    check_probability("pi", pi)?;
    check_sample_size(n)?;
    let (a, b) = (p.p00(), p.p11());
    let f = agreement_probability(a, b);
    let denom = p.determinant().powi(3) * n as f64;
    let d00 = -(f * (1.0 - pi) + 2.0 * b * pi * (1.0 - b)) / denom;
    let d11 = -(2.0 * a * (1.0 - a) * (1.0 - pi) + pi * f) / denom;
    Ok((d00, d11))
}

/// `P(X = 1) P(X = 0)` for one respondent; the numerator of the variance.
pub fn response_variance(p: &DesignMatrix, pi: f64) -> Result<f64> {
    let r = response_pmf(p, pi)?;
    Ok(r.p_one * r.p_zero)
}

fn check_sample_size(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter(
            "sample size n must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}
