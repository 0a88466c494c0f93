//! Binary randomized-response mechanisms and their privacy region.
//!
//! A mechanism is the row-stochastic matrix
//!
//! ```text
//!   | p00    1-p00 |
//!   | 1-p11  p11   |
//! ```
//!
//! where row `i` is the distribution of the reported bit given truthful bit `i`.
//! (ε, δ)-differential privacy for a single binary respondent reduces to four
//! linear inequalities on `(p00, p11)`. When `p00 + p11 > 1` only the first two
//! can bind; their solution set is the region called `R'` below, and its
//! binding edge (two line segments) is parametrised by [`boundary_point`].

use rand::Rng;
use serde::Serialize;

use crate::error::{check_probability, Error, Result};

/// Default absolute slack allowed when testing constraint membership.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// `|p00 + p11 - 1|` at or below this value is treated as a singular mechanism.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// The pair `(p00, p11)` of truthful-retention probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignMatrix {
    p00: f64,
    p11: f64,
}

impl DesignMatrix {
    /// Direct questioning: every respondent reports the truth.
    pub const DIRECT: DesignMatrix = DesignMatrix { p00: 1.0, p11: 1.0 };

    pub fn new(p00: f64, p11: f64) -> Result<Self> {
        Ok(Self {
            p00: check_probability("p00", p00)?,
            p11: check_probability("p11", p11)?,
        })
    }

    /// Warner's symmetric design, `p00 = p11 = pw`.
    pub fn warner(pw: f64) -> Result<Self> {
        Self::new(pw, pw)
    }

    pub fn p00(&self) -> f64 {
        self.p00
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    /// Probability that a truthful 0 is reported as 1.
    pub fn p01(&self) -> f64 {
        1.0 - self.p00
    }

    /// Probability that a truthful 1 is reported as 0.
    pub fn p10(&self) -> f64 {
        1.0 - self.p11
    }

    /// `p00 + p11 - 1`, the determinant of the 2x2 matrix.
    pub fn determinant(&self) -> f64 {
        self.p00 + self.p11 - 1.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.determinant().abs() <= DEGENERACY_TOLERANCE
    }

    /// Fails with [`Error::DegenerateMechanism`] when the estimator is undefined.
    pub fn check_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateMechanism {
                sum: self.p00 + self.p11,
            })
        } else {
            Ok(())
        }
    }

    /// Swaps the roles of the two truthful values: `(p11, p00)`.
    pub fn transposed(&self) -> Self {
        Self {
            p00: self.p11,
            p11: self.p00,
        }
    }

    /// Swaps the two output columns: `(1 - p00, 1 - p11)`.
    pub fn complemented(&self) -> Self {
        Self {
            p00: 1.0 - self.p00,
            p11: 1.0 - self.p11,
        }
    }

    /// Lexicographic order on `(p00, p11)`; used to break exact ties.
    pub fn lexicographic_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.p00
            .total_cmp(&other.p00)
            .then(self.p11.total_cmp(&other.p11))
    }
}

/// A privacy budget `(ε, δ)` with `e^ε` cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
    #[serde(skip)]
    exp_epsilon: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidPrivacy(format!(
                "epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidPrivacy(format!(
                "delta must lie in [0, 1], got {delta}"
            )));
        }
        Ok(Self {
            epsilon,
            delta,
            exp_epsilon: epsilon.exp(),
        })
    }

    /// Pure ε-differential privacy.
    pub fn strict(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn exp_epsilon(&self) -> f64 {
        self.exp_epsilon
    }

    /// `(e^ε + δ) / (e^ε + 1)`: the symmetric extreme point of `R'`.
    pub fn corner_probability(&self) -> f64 {
        (self.exp_epsilon + self.delta) / (self.exp_epsilon + 1.0)
    }
}

/// Distribution of a single randomized response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseDistribution {
    pub p_zero: f64,
    pub p_one: f64,
}

/// Output distribution of the mechanism when a fraction `pi` of the population holds 1.
pub fn response_pmf(p: &DesignMatrix, pi: f64) -> Result<ResponseDistribution> {
    check_probability("pi", pi)?;
    let shift = pi * p.determinant();
    Ok(ResponseDistribution {
        p_zero: p.p00 - shift,
        p_one: 1.0 - p.p00 + shift,
    })
}

/// Reports `truth` through the mechanism using one uniform draw from `rng`.
pub fn randomize<R: Rng + ?Sized>(p: &DesignMatrix, truth: bool, rng: &mut R) -> bool {
    let keep = if truth { p.p11 } else { p.p00 };
    let u: f64 = rng.random();
    if u < keep {
        truth
    } else {
        !truth
    }
}

/// Slack (right side minus left side) of each of the four privacy inequalities.
/// A constraint holds when its slack is non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DpSlacks {
    /// `e^ε (1 - p00) + δ - p11`
    pub dp1: f64,
    /// `e^ε (1 - p11) + δ - p00`
    pub dp2: f64,
    /// `e^ε p11 + δ - (1 - p00)`
    pub dp3: f64,
    /// `e^ε p00 + δ - (1 - p11)`
    pub dp4: f64,
}

impl DpSlacks {
    pub fn of(p00: f64, p11: f64, privacy: &PrivacyParams) -> Self {
        let e = privacy.exp_epsilon;
        let d = privacy.delta;
        Self {
            dp1: e * (1.0 - p00) + d - p11,
            dp2: e * (1.0 - p11) + d - p00,
            dp3: e * p11 + d - (1.0 - p00),
            dp4: e * p00 + d - (1.0 - p11),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.dp1, self.dp2, self.dp3, self.dp4]
    }

    pub fn min(&self) -> f64 {
        self.as_array().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Whether the mechanism is (ε, δ)-differentially private, allowing `tol` of slack.
pub fn satisfies_dp(p: &DesignMatrix, privacy: &PrivacyParams, tol: f64) -> bool {
    DpSlacks::of(p.p00, p.p11, privacy).min() >= -tol
}

/// Relabels the outputs so that `p00 + p11 > 1`. The flag reports whether a
/// swap happened.
pub fn normalize_orientation(p: &DesignMatrix) -> Result<(DesignMatrix, bool)> {
    p.check_nondegenerate()?;
    if p.determinant() > 0.0 {
        Ok((*p, false))
    } else {
        Ok((p.complemented(), true))
    }
}

/// Membership of raw coordinates in `R'`.
///
/// Coordinates are not required to be a valid [`DesignMatrix`]; boundary
/// parametrisations leave the unit square for small `t`.
pub fn coords_in_region_r_prime(p00: f64, p11: f64, privacy: &PrivacyParams, tol: f64) -> bool {
    if p00 > 1.0 + tol || p11 > 1.0 + tol {
        return false;
    }
    if p00 + p11 - 1.0 <= DEGENERACY_TOLERANCE {
        return false;
    }
    let s = DpSlacks::of(p00, p11, privacy);
    s.dp1 >= -tol && s.dp2 >= -tol
}

pub fn in_region_r_prime(p: &DesignMatrix, privacy: &PrivacyParams, tol: f64) -> bool {
    coords_in_region_r_prime(p.p00, p.p11, privacy, tol)
}

/// Membership in `R''`: inside `R'` with at least one of the two active
/// constraints binding within `tol`.
pub fn on_boundary_r_double_prime(p: &DesignMatrix, privacy: &PrivacyParams, tol: f64) -> bool {
    if !in_region_r_prime(p, privacy, tol) {
        return false;
    }
    let s = DpSlacks::of(p.p00, p.p11, privacy);
    s.dp1.abs() <= tol || s.dp2.abs() <= tol
}

/// Which of the two active privacy inequalities is tight along a boundary segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// `p11 = e^ε (1 - p00) + δ`; the segment `(r(t), s(t))`.
    Dp1Tight,
    /// `p00 = e^ε (1 - p11) + δ`; the segment `(s(t), r(t))`.
    Dp2Tight,
}

/// A point on one of the two boundary segments of `R'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub t: f64,
    pub p00: f64,
    pub p11: f64,
    pub branch: Branch,
}

impl BoundaryPoint {
    /// The point as a mechanism; fails when it lies outside the unit square.
    pub fn design_matrix(&self) -> Result<DesignMatrix> {
        DesignMatrix::new(self.p00, self.p11)
    }

    pub fn in_region_r_prime(&self, privacy: &PrivacyParams, tol: f64) -> bool {
        coords_in_region_r_prime(self.p00, self.p11, privacy, tol)
    }
}

/// `s(t) = t (e^ε + δ) / (e^ε + 1)`.
pub fn boundary_s(t: f64, privacy: &PrivacyParams) -> f64 {
    t * privacy.corner_probability()
}

/// `r(t) = 1 - e^{-ε} (s(t) - δ)`.
pub fn boundary_r(t: f64, privacy: &PrivacyParams) -> f64 {
    1.0 - (boundary_s(t, privacy) - privacy.delta) / privacy.exp_epsilon
}

/// Evaluates the boundary parametrisation at `t ∈ [0, 1]`. `t = 1` is the
/// symmetric corner where both constraints bind.
pub fn boundary_point(t: f64, privacy: &PrivacyParams, branch: Branch) -> Result<BoundaryPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "boundary parameter t must lie in [0, 1], got {t}"
        )));
    }
    let r = boundary_r(t, privacy);
    let s = boundary_s(t, privacy);
    let (p00, p11) = match branch {
        Branch::Dp1Tight => (r, s),
        Branch::Dp2Tight => (s, r),
    };
    Ok(BoundaryPoint {
        t,
        p00,
        p11,
        branch,
    })
}

/// The boundary parameter at which a segment meets the edge of the unit
/// square; `boundary_point(t_zero, .., Dp1Tight)` is `(1, δ)`.
pub fn t_zero(privacy: &PrivacyParams) -> f64 {
    let e = privacy.exp_epsilon;
    privacy.delta * (e + 1.0) / (e + privacy.delta)
}
