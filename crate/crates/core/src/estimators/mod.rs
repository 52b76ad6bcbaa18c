//! Empirical level-set estimators over intervals, balls and ellipses.
//!
//! The 1D estimators are exact scans over order statistics. Ties are broken
//! lexicographically: smallest left index first, then smallest right index.
//! In the plane the class parameters are found by multi-start simplex search.

mod line;
mod oracle;
mod plane;
mod relaxed;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::models::Sample;

pub use line::{excess_mass_1d, max_prob_1d, max_prob_equal_vol_1d, min_volume_1d};
pub use oracle::{brute_force_oracle_1d, brute_force_oracle_1d_with, TieRule, ORACLE_MAX_N};
pub use plane::{estimate_2d, SearchConfig};
pub use relaxed::relaxed_estimate_1d;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Maximize `P_n(A) - lambda mu(A)`.
    ExcessMass { lambda: f64 },
    /// Minimize `mu(A)` subject to `P_n(A) >= p_lambda`.
    MinVolume { p_lambda: f64 },
    /// Maximize `P_n(A)` subject to `mu(A) <= v_lambda`.
    MaxProb { v_lambda: f64 },
    /// Maximize `P_n(A)` subject to `mu(A) = v_lambda`.
    MaxProbEqualVol { v_lambda: f64 },
    /// Any candidate within `delta_n * n^(-2/3)` of the optimum.
    Relaxed {
        inner: Box<EstimatorKind>,
        delta_n: f64,
    },
}

impl EstimatorKind {
    pub fn label(&self) -> String {
        match self {
            EstimatorKind::ExcessMass { .. } => "excess-mass".into(),
            EstimatorKind::MinVolume { .. } => "min-volume".into(),
            EstimatorKind::MaxProb { .. } => "max-prob".into(),
            EstimatorKind::MaxProbEqualVol { .. } => "max-prob-equal-vol".into(),
            EstimatorKind::Relaxed { inner, .. } => format!("relaxed-{}", inner.label()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            EstimatorKind::ExcessMass { lambda } if !(*lambda >= 0.0 && lambda.is_finite()) => bad(
                format!("lambda must be non-negative and finite, got {lambda}"),
            ),
            EstimatorKind::MinVolume { p_lambda } if !(*p_lambda > 0.0 && *p_lambda <= 1.0) => {
                bad(format!("p_lambda must lie in (0, 1], got {p_lambda}"))
            }
            EstimatorKind::MaxProb { v_lambda } | EstimatorKind::MaxProbEqualVol { v_lambda }
                if !(*v_lambda > 0.0 && v_lambda.is_finite()) =>
            {
                bad(format!(
                    "v_lambda must be positive and finite, got {v_lambda}"
                ))
            }
            EstimatorKind::Relaxed { inner, delta_n } => {
                if !(*delta_n >= 0.0 && delta_n.is_finite()) {
                    return bad(format!("delta_n must be non-negative, got {delta_n}"));
                }
                match **inner {
                    EstimatorKind::ExcessMass { .. }
                    | EstimatorKind::MinVolume { .. }
                    | EstimatorKind::MaxProb { .. } => inner.validate(),
                    _ => bad("relaxed estimators wrap excess-mass, min-volume or max-prob".into()),
                }
            }
            _ => Ok(()),
        }
    }
}

/// Candidate set family searched by an estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetClass {
    Intervals,
    Balls,
    Ellipsoids,
}

impl std::str::FromStr for SetClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intervals" => Ok(SetClass::Intervals),
            "balls" => Ok(SetClass::Balls),
            "ellipsoids" => Ok(SetClass::Ellipsoids),
            other => Err(Error::InvalidParameter(format!(
                "unknown set class `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Number of optimal candidates beyond the one returned.
    pub tie_count: usize,
    pub search_restarts: usize,
    /// Number of sample points in the returned set; the empirical mass is
    /// this count over `n`.
    pub empirical_count: usize,
    /// Slack used by relaxed estimators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub set: ConvexBody,
    /// Excess mass for excess-mass estimators, volume for min-volume,
    /// empirical probability for max-prob estimators.
    pub objective: f64,
    pub kind: EstimatorKind,
    pub n: usize,
    pub diagnostics: Diagnostics,
}

impl EstimateResult {
    pub fn empirical_mass(&self) -> f64 {
        self.diagnostics.empirical_count as f64 / self.n as f64
    }
}

/// Runs `kind` over `class` on `sample`. 1D samples need not be sorted.
pub fn estimate(
    sample: &Sample,
    kind: &EstimatorKind,
    class: SetClass,
    search: &SearchConfig,
) -> Result<EstimateResult> {
    kind.validate()?;
    match (sample, class) {
        (Sample::Line(xs), SetClass::Intervals) => {
            let mut xs = xs.clone();
            sort_sample(&mut xs)?;
            estimate_1d(&xs, kind)
        }
        (Sample::Plane(pts), SetClass::Balls | SetClass::Ellipsoids) => {
            estimate_2d(pts, kind, class, search)
        }
        (Sample::Line(_), _) => Err(Error::DimensionMismatch {
            expected: 2,
            got: 1,
        }),
        (Sample::Plane(_), SetClass::Intervals) => Err(Error::DimensionMismatch {
            expected: 1,
            got: 2,
        }),
    }
}

/// Dispatches a 1D estimator on an already sorted sample.
pub fn estimate_1d(sorted: &[f64], kind: &EstimatorKind) -> Result<EstimateResult> {
    match kind {
        EstimatorKind::ExcessMass { lambda } => excess_mass_1d(sorted, *lambda),
        EstimatorKind::MinVolume { p_lambda } => min_volume_1d(sorted, *p_lambda),
        EstimatorKind::MaxProb { v_lambda } => max_prob_1d(sorted, *v_lambda),
        EstimatorKind::MaxProbEqualVol { v_lambda } => max_prob_equal_vol_1d(sorted, *v_lambda),
        EstimatorKind::Relaxed { .. } => relaxed_estimate_1d(sorted, kind),
    }
}

/// Sorts in place, rejecting non-finite values.
pub fn sort_sample(xs: &mut [f64]) -> Result<()> {
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite sample value {x}"
        )));
    }
    xs.sort_by(f64::total_cmp);
    Ok(())
}

pub(crate) fn check_sorted(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "sample must be finite and sorted ascending".into(),
        ));
    }
    Ok(())
}

/// `ceil(n p)` clamped to `1..=n`.
pub fn required_count(n: usize, p_lambda: f64) -> usize {
    ((n as f64 * p_lambda).ceil() as usize).clamp(1, n)
}

/// Excess-mass objective of the window `[x_i, x_j]` spanning `j - i + 1`
/// order statistics. All 1D code evaluates windows through this function so
/// that equal windows compare equal bit for bit.
#[inline]
pub(crate) fn window_excess(xs: &[f64], i: usize, j: usize, lambda: f64) -> f64 {
    let n = xs.len() as f64;
    (j - i + 1) as f64 / n - lambda * (xs[j] - xs[i])
}

/// Number of sample points in `[lo, hi]` for a sorted sample.
pub(crate) fn count_between(xs: &[f64], lo: f64, hi: f64) -> usize {
    let start = xs.partition_point(|&x| x < lo);
    let end = xs.partition_point(|&x| x <= hi);
    end.saturating_sub(start)
}
