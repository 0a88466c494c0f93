//! Survey simulation and Monte Carlo checks of the estimator.
//!
//! Each respondent owns two streams, one for the truthful bit and one for the
//! randomization coin, addressed by `(seed, trial, respondent)`. Trials run in
//! parallel; per-trial estimates are gathered in trial order and reduced
//! sequentially, so reports are bit-identical for any thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::estimator::{estimator_variance, mle_estimate, SurveyOutcome};
use crate::mechanism::{randomize, DesignMatrix};
use crate::rng::{CounterRng, StreamTag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub pi_true: f64,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn new(pi_true: f64, n: u64, trials: u64, seed: u64) -> Result<Self> {
        check_probability("pi_true", pi_true)?;
        if n == 0 {
            return Err(Error::InvalidParameter(
                "respondents per survey must be at least 1".into(),
            ));
        }
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(Self {
            pi_true,
            n,
            trials,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub mean_estimate: f64,
    /// Sample variance of the per-trial estimates (divisor `trials - 1`).
    pub empirical_variance: f64,
    pub theoretical_variance: f64,
    /// `(mean - pi) * sqrt(trials / theoretical_variance)`.
    pub z_score_bias: f64,
    /// Estimated standard error of `empirical_variance`.
    pub variance_std_error: f64,
    pub trials: u64,
}

/// One survey of `cfg.n` respondents; `cfg.trials` is ignored and `trial`
/// selects the stream.
pub fn simulate_survey(p: &DesignMatrix, cfg: &SimulationConfig, trial: u64) -> SurveyOutcome {
    survey(p, cfg, trial, 0)
}

fn survey(p: &DesignMatrix, cfg: &SimulationConfig, trial: u64, mechanism: u32) -> SurveyOutcome {
    let ones = (0..cfg.n)
        .filter(|&i| {
            let truth =
                CounterRng::new(cfg.seed, trial, i, StreamTag::Truth).uniform() < cfg.pi_true;
            let mut coin = CounterRng::new(cfg.seed, trial, i, StreamTag::Randomization(mechanism));
            randomize(p, truth, &mut coin)
        })
        .count() as u64;
    SurveyOutcome::new(cfg.n, ones).expect("count never exceeds n")
}

/// Runs `cfg.trials` independent surveys and compares the spread of the MLE
/// with its closed-form variance.
pub fn monte_carlo(p: &DesignMatrix, cfg: &SimulationConfig) -> Result<MonteCarloReport> {
    run(p, cfg, 0)
}

fn run(p: &DesignMatrix, cfg: &SimulationConfig, mechanism: u32) -> Result<MonteCarloReport> {
    p.check_nondegenerate()?;
    let theoretical = estimator_variance(p, cfg.pi_true, cfg.n)?;
    let estimates: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let outcome = survey(p, cfg, t, mechanism);
            mle_estimate(p, &outcome).expect("mechanism checked non-degenerate")
        })
        .collect();
    Ok(summarize(&estimates, cfg.pi_true, theoretical))
}

/// Monte Carlo reports for several mechanisms sharing one population: the
/// truthful bits are common to all entries, the coins are independent.
pub fn compare_mechanisms(
    mechanisms: &[DesignMatrix],
    cfg: &SimulationConfig,
) -> Result<Vec<MonteCarloReport>> {
    mechanisms
        .iter()
        .enumerate()
        .map(|(k, p)| run(p, cfg, k as u32))
        .collect()
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn summarize(estimates: &[f64], pi: f64, theoretical: f64) -> MonteCarloReport {
    let m = estimates.len() as f64;
    let mean = compensated_sum(estimates.iter().copied()) / m;
    let m2 = compensated_sum(estimates.iter().map(|x| (x - mean).powi(2))) / m;
    let m4 = compensated_sum(estimates.iter().map(|x| (x - mean).powi(4))) / m;
    let (empirical_variance, variance_std_error) = if estimates.len() > 1 {
        (m2 * m / (m - 1.0), ((m4 - m2 * m2).max(0.0) / m).sqrt())
    } else {
        (0.0, 0.0)
    };
    let bias = mean - pi;
    let z_score_bias = if theoretical > 0.0 {
        bias * (m / theoretical).sqrt()
    } else if bias.abs() <= 1e-12 {
        0.0
    } else {
        bias.signum() * f64::INFINITY
    };
    MonteCarloReport {
        mean_estimate: mean,
        empirical_variance,
        theoretical_variance: theoretical,
        z_score_bias,
        variance_std_error,
        trials: estimates.len() as u64,
    }
}
