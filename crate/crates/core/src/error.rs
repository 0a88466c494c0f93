use thiserror::Error;

/// Errors raised by mechanism construction, estimation and optimization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must lie in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid privacy budget: {0}")]
    InvalidPrivacy(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `p00 + p11 = 1`: every respondent produces the same output distribution.
    #[error("degenerate mechanism: p00 + p11 = {sum}, the estimator is undefined")]
    DegenerateMechanism { sum: f64 },

    #[error("epsilon = 0 with delta = 0 forces p00 + p11 = 1 and unbounded estimator error")]
    ZeroEpsilonStrict,

    #[error("threshold g is singular: e^epsilon + 2 delta - 1 = 0")]
    SingularThreshold,

    #[error("population proportion must lie strictly inside (0, 1), got {0}")]
    ProportionOutOfRange(f64),

    #[error("no feasible design matrix on the search lattice")]
    EmptyFeasibleRegion,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}
