//! Variance-optimal private mechanisms.
//!
//! Under pure ε-privacy the optimum is Warner's design at `e^ε / (e^ε + 1)`.
//! With δ > 0 only two candidates survive: the symmetric corner
//! `(e^ε + δ) / (e^ε + 1)` on the diagonal, and the edge point `(1, δ)` (or
//! `(δ, 1)` when π > 1/2). Which one wins is decided by comparing the threshold
//! [`g_threshold`] against `min(π, 1 - π)`.
//!
//! [`brute_force_optimal`] searches a lattice over the feasible region and is
//! used as an oracle for the closed forms.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::estimator::{estimator_variance, variance_unchecked};
use crate::mechanism::{
    boundary_point, coords_in_region_r_prime, t_zero, Branch, DesignMatrix, PrivacyParams,
    DEFAULT_TOLERANCE, DEGENERACY_TOLERANCE,
};

/// `|g - min(π, 1 - π)|` at or below this is reported as a tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Smallest lattice accepted by [`brute_force_optimal`].
pub const MIN_LATTICE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// δ = 0: Warner's design at `e^ε / (e^ε + 1)`.
    StrictDP,
    /// The symmetric corner `(e^ε + δ) / (e^ε + 1)` wins.
    CornerInterior,
    /// The edge point `(1, δ)` or `(δ, 1)` wins.
    CornerBoundary,
    /// Both candidates attain the same variance.
    Tie,
    /// Optimum restricted to Warner's symmetric family.
    WarnerDiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalResult {
    pub mechanisms: Vec<DesignMatrix>,
    pub regime: Regime,
    pub g_value: Option<f64>,
    pub pi: f64,
    /// Variance at `pi` for a single respondent (n = 1).
    pub variance_at_pi: f64,
}

impl OptimalResult {
    pub fn variance_for_sample_size(&self, n: u64) -> f64 {
        self.variance_at_pi / n as f64
    }

    fn new(
        mechanisms: Vec<DesignMatrix>,
        regime: Regime,
        g_value: Option<f64>,
        pi: f64,
    ) -> Result<Self> {
        let variance_at_pi = estimator_variance(&mechanisms[0], pi, 1)?;
        Ok(Self {
            mechanisms,
            regime,
            g_value,
            pi,
            variance_at_pi,
        })
    }
}

/// The optimal ε-private mechanism, `p00 = p11 = e^ε / (e^ε + 1)`.
pub fn optimal_strict(epsilon: f64) -> Result<DesignMatrix> {
    let privacy = PrivacyParams::strict(epsilon)?;
    if epsilon == 0.0 {
        return Err(Error::ZeroEpsilonStrict);
    }
    let e = privacy.exp_epsilon();
    DesignMatrix::warner(e / (e + 1.0))
}

/// `g(ε, δ) = δ (e^ε + δ) / (e^ε + 2δ - 1)^2`.
pub fn g_threshold(privacy: &PrivacyParams) -> Result<f64> {
    let e = privacy.exp_epsilon();
    let d = privacy.delta();
    let den = e + 2.0 * d - 1.0;
    if den.abs() <= DEGENERACY_TOLERANCE {
        return Err(Error::SingularThreshold);
    }
    Ok(d * (e + d) / (den * den))
}

/// The variance-minimising (ε, δ)-private mechanism(s) for proportion `pi`.
///
/// With δ = 0 this is [`optimal_strict`]. At δ = 1 both candidates collapse to
/// direct questioning. At `pi = 1/2` the two edge points are mirror images
/// and both are returned when the edge regime wins.
pub fn optimal_relaxed(privacy: &PrivacyParams, pi: f64) -> Result<OptimalResult> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::ProportionOutOfRange(pi));
    }
    let delta = privacy.delta();
    if delta == 0.0 {
        let p = optimal_strict(privacy.epsilon())?;
        return OptimalResult::new(vec![p], Regime::StrictDP, None, pi);
    }

    let g = g_threshold(privacy)?;
    let corner = DesignMatrix::warner(privacy.corner_probability())?;
    if delta == 1.0 {
        return OptimalResult::new(vec![corner], Regime::CornerInterior, Some(g), pi);
    }

    let low_edge = DesignMatrix::new(1.0, delta)?;
    let high_edge = low_edge.transposed();
    let (target, edges) = if pi == 0.5 {
        (pi, vec![low_edge, high_edge])
    } else if pi < 0.5 {
        (pi, vec![low_edge])
    } else {
        (1.0 - pi, vec![high_edge])
    };

    let gap = g - target;
    if gap.abs() <= TIE_TOLERANCE {
        let mut all = vec![corner];
        all.extend(edges);
        OptimalResult::new(all, Regime::Tie, Some(g), pi)
    } else if gap > 0.0 {
        OptimalResult::new(edges, Regime::CornerBoundary, Some(g), pi)
    } else {
        OptimalResult::new(vec![corner], Regime::CornerInterior, Some(g), pi)
    }
}

/// Optimal spinner probability for Warner's design: the top of the feasible
/// interval `(1/2, (e^ε + δ) / (e^ε + 1)]`.
pub fn optimal_warner(privacy: &PrivacyParams) -> Result<f64> {
    if privacy.epsilon() == 0.0 && privacy.delta() == 0.0 {
        return Err(Error::ZeroEpsilonStrict);
    }
    Ok(privacy.corner_probability())
}

/// [`optimal_warner`] packaged with its variance at `pi`.
pub fn optimal_warner_result(privacy: &PrivacyParams, pi: f64) -> Result<OptimalResult> {
    check_probability("pi", pi)?;
    let pw = optimal_warner(privacy)?;
    OptimalResult::new(
        vec![DesignMatrix::warner(pw)?],
        Regime::WarnerDiagonal,
        None,
        pi,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeOptimum {
    pub mechanism: DesignMatrix,
    pub variance: f64,
    /// Lattice spacing along each axis.
    pub cell: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    variance: f64,
    p00: f64,
    p11: f64,
}

impl Candidate {
    fn better(self, other: Self) -> Self {
        let ord = self
            .variance
            .total_cmp(&other.variance)
            .then(self.p00.total_cmp(&other.p00))
            .then(self.p11.total_cmp(&other.p11));
        if ord.is_le() {
            self
        } else {
            other
        }
    }
}

/// Exhaustive search over a `grid x grid` lattice on the unit square,
/// restricted to the feasible region with `p00 + p11 > 1`, plus the exact
/// endpoints of both boundary segments.
///
/// Ties are broken towards the lexicographically smallest `(p00, p11)`, so the
/// result does not depend on the parallel schedule.
pub fn brute_force_optimal(
    privacy: &PrivacyParams,
    pi: f64,
    n: u64,
    grid: usize,
) -> Result<LatticeOptimum> {
    check_probability("pi", pi)?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size n must be at least 1".into(),
        ));
    }
    if grid < MIN_LATTICE {
        return Err(Error::InvalidParameter(format!(
            "lattice size must be at least {MIN_LATTICE}, got {grid}"
        )));
    }
    let cell = 1.0 / (grid - 1) as f64;
    let nf = n as f64;
    let tol = DEFAULT_TOLERANCE;
    let evaluate = |p00: f64, p11: f64| -> Option<Candidate> {
        coords_in_region_r_prime(p00, p11, privacy, tol).then(|| Candidate {
            variance: variance_unchecked(p00, p11, pi, nf),
            p00,
            p11,
        })
    };

    let lattice_best = (0..grid)
        .into_par_iter()
        .filter_map(|i| {
            let p00 = i as f64 * cell;
            (0..grid)
                .filter_map(|j| evaluate(p00, j as f64 * cell))
                .reduce(Candidate::better)
        })
        .reduce_with(Candidate::better);

    let t0 = t_zero(privacy);
    let mut best = lattice_best;
    for t in [t0, 1.0] {
        for branch in [Branch::Dp1Tight, Branch::Dp2Tight] {
            let b = boundary_point(t, privacy, branch)?;
            if b.design_matrix().is_err() {
                continue;
            }
            if let Some(c) = evaluate(b.p00, b.p11) {
                best = Some(match best {
                    Some(cur) => cur.better(c),
                    None => c,
                });
            }
        }
    }

    let best = best.ok_or(Error::EmptyFeasibleRegion)?;
    Ok(LatticeOptimum {
        mechanism: DesignMatrix::new(best.p00, best.p11)?,
        variance: best.variance,
        cell,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourRow {
    pub epsilon: f64,
    pub delta: f64,
    /// `None` where `e^ε + 2δ - 1 = 0`.
    pub g: Option<f64>,
}

/// Points where `g` first reaches `level` along δ, one per ε column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCurve {
    pub level: f64,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSweep {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// ε-major: all δ values for the first ε, then the next ε, and so on.
    pub rows: Vec<ContourRow>,
    pub level_curves: Vec<LevelCurve>,
}

impl ContourSweep {
    pub fn g_at(&self, eps_index: usize, delta_index: usize) -> Option<f64> {
        self.rows[eps_index * self.deltas.len() + delta_index].g
    }

    fn column_crossing(&self, i: usize, level: f64) -> Option<f64> {
        let ds = &self.deltas;
        for j in 0..ds.len() {
            let gj = self.g_at(i, j)?;
            if gj == level {
                return Some(ds[j]);
            }
            if j + 1 == ds.len() {
                break;
            }
            let Some(gk) = self.g_at(i, j + 1) else {
                continue;
            };
            if (gj - level) * (gk - level) < 0.0 {
                let w = (level - gj) / (gk - gj);
                return Some(ds[j] + w * (ds[j + 1] - ds[j]));
            }
        }
        None
    }
}

/// Linearly spaced axis; a degenerate range yields a single point.
fn axis(range: (f64, f64), resolution: usize, name: &str) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "{name} range must be finite with min <= max, got [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (resolution - 1) as f64;
    Ok((0..resolution)
        .map(|k| {
            if k + 1 == resolution {
                hi
            } else {
                lo + k as f64 * step
            }
        })
        .collect())
}

/// Evaluates [`g_threshold`] over an (ε, δ) lattice and samples the requested
/// level sets column by column.
pub fn contour_sweep(
    levels: &[f64],
    epsilon_range: (f64, f64),
    delta_range: (f64, f64),
    resolution: usize,
) -> Result<ContourSweep> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let epsilons = axis(epsilon_range, resolution, "epsilon")?;
    let deltas = axis(delta_range, resolution, "delta")?;

    let mut rows = Vec::with_capacity(epsilons.len() * deltas.len());
    for &epsilon in &epsilons {
        for &delta in &deltas {
            let privacy = PrivacyParams::new(epsilon, delta)?;
            rows.push(ContourRow {
                epsilon,
                delta,
                g: g_threshold(&privacy).ok(),
            });
        }
    }

    let mut sweep = ContourSweep {
        epsilons,
        deltas,
        rows,
        level_curves: Vec::with_capacity(levels.len()),
    };
    for &level in levels {
        let points = (0..sweep.epsilons.len())
            .filter_map(|i| {
                sweep
                    .column_crossing(i, level)
                    .map(|d| (sweep.epsilons[i], d))
            })
            .collect();
        sweep.level_curves.push(LevelCurve { level, points });
    }
    Ok(sweep)
}
