//! Oracles shared by the integration suites. Nothing here calls the variance
//! or estimator code paths it is used to check.

#![allow(dead_code)]

/// Exact mean and variance of `f(N)` for `N ~ Binomial(n, q)`, by summing the
/// probability mass function.
pub fn binomial_moments(n: u64, q: f64, f: impl Fn(u64) -> f64) -> (f64, f64) {
    let mut choose = 1.0f64;
    let (mut m1, mut m2) = (0.0, 0.0);
    for k in 0..=n {
        if k > 0 {
            choose = choose * (n - k + 1) as f64 / k as f64;
        }
        let w = choose * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
        let y = f(k);
        m1 += w * y;
        m2 += w * y * y;
    }
    (m1, m2 - m1 * m1)
}

/// The raw MLE written out from the likelihood stationarity condition:
/// `P(X=1) = N / n` solved for π.
pub fn mle_from_likelihood(p00: f64, p11: f64, n: u64, ones: u64) -> f64 {
    let freq = ones as f64 / n as f64;
    (freq - (1.0 - p00)) / (p00 + p11 - 1.0)
}

/// Per-respondent variance as `P(X=1) P(X=0) / det^2`, written from the
/// response probabilities directly.
pub fn variance_from_pmf(p00: f64, p11: f64, pi: f64) -> f64 {
    let one = pi * p11 + (1.0 - pi) * (1.0 - p00);
    let det = p00 + p11 - 1.0;
    one * (1.0 - one) / (det * det)
}

/// Variance at the edge point `(1, δ)`: `π (1 - π δ) / δ`.
pub fn edge_variance(delta: f64, pi: f64) -> f64 {
    pi * (1.0 - pi * delta) / delta
}

/// Tiny deterministic generator for parameter draws in tests.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Self(
            seed.wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407),
        )
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
