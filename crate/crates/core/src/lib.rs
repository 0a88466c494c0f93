//! Design, verification and evaluation of differentially private binary
//! randomized-response mechanisms.
//!
//! - [`mechanism`]: design matrices, the privacy constraints and the boundary
//!   of the feasible region.
//! - [`estimator`]: the maximum likelihood estimator, its exact variance and
//!   margins of error.
//! - [`optimizer`]: closed-form optimal mechanisms, a lattice-search oracle and
//!   the `g(ε, δ)` contour sweep.
//! - [`simulation`]: seeded survey simulation and Monte Carlo validation.

pub mod error;
pub mod estimator;
pub mod mechanism;
pub mod optimizer;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
pub use estimator::{
    build_report, estimator_variance, margin_of_error, mle_estimate, warner_variance,
    EstimateReport, MarginMethod, SurveyOutcome,
};
pub use mechanism::{
    boundary_point, in_region_r_prime, normalize_orientation, randomize, response_pmf,
    satisfies_dp, t_zero, BoundaryPoint, Branch, DesignMatrix, DpSlacks, PrivacyParams,
    ResponseDistribution, DEFAULT_TOLERANCE,
};
pub use optimizer::{
    brute_force_optimal, contour_sweep, g_threshold, optimal_relaxed, optimal_strict,
    optimal_warner, ContourRow, ContourSweep, LatticeOptimum, LevelCurve, OptimalResult, Regime,
};
pub use simulation::{
    compare_mechanisms, monte_carlo, simulate_survey, MonteCarloReport, SimulationConfig,
};
