//! Exact 1D estimators over the class of closed intervals.

use super::{
    check_sorted, count_between, required_count, window_excess, Diagnostics, EstimateResult,
    EstimatorKind,
};
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;

fn check_param(name: &str, value: f64, positive: bool) -> Result<()> {
    let ok = value.is_finite() && if positive { value > 0.0 } else { value >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("invalid {name}: {value}")))
    }
}

fn interval_result(
    xs: &[f64],
    lo: f64,
    hi: f64,
    objective: f64,
    kind: EstimatorKind,
    tie_count: usize,
) -> Result<EstimateResult> {
    Ok(EstimateResult {
        set: ConvexBody::interval(lo, hi)?,
        objective,
        kind,
        n: xs.len(),
        diagnostics: Diagnostics {
            tie_count,
            search_restarts: 0,
            empirical_count: count_between(xs, lo, hi),
            slack: None,
        },
    })
}

/// Interval `[x_i, x_j]` maximizing `(j - i + 1)/n - lambda (x_j - x_i)`.
///
/// Maximum subarray over the gap weights `1/n - lambda (x_{m+1} - x_m)`: the
/// objective of a window is `1/n` plus the weight sum over its interior gaps.
pub fn excess_mass_1d(sorted: &[f64], lambda: f64) -> Result<EstimateResult> {
    check_sorted(sorted)?;
    check_param("lambda", lambda, false)?;
    let n = sorted.len();
    let inv_n = 1.0 / n as f64;

    let mut start = 0usize;
    let mut run = 0.0f64;
    let mut best = (0usize, 0usize);
    let mut best_val = window_excess(sorted, 0, 0, lambda);
    let mut ties = 0usize;
    for j in 1..n {
        let extended = run + inv_n - lambda * (sorted[j] - sorted[j - 1]);
        if extended >= 0.0 {
            run = extended;
        } else {
            run = 0.0;
            start = j;
        }
        let val = window_excess(sorted, start, j, lambda);
        if val > best_val {
            best_val = val;
            best = (start, j);
            ties = 0;
        } else if val == best_val {
            ties += 1;
            if (start, j) < best {
                best = (start, j);
            }
        }
    }
    interval_result(
        sorted,
        sorted[best.0],
        sorted[best.1],
        best_val,
        EstimatorKind::ExcessMass { lambda },
        ties,
    )
}

/// Shortest window `[x_i, x_{i+k-1}]` with `k = ceil(n p_lambda)`.
pub fn min_volume_1d(sorted: &[f64], p_lambda: f64) -> Result<EstimateResult> {
    check_sorted(sorted)?;
    if !(p_lambda > 0.0 && p_lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_lambda must lie in (0, 1], got {p_lambda}"
        )));
    }
    let n = sorted.len();
    let k = required_count(n, p_lambda);
    let mut best_i = 0;
    let mut best_len = sorted[k - 1] - sorted[0];
    let mut ties = 0;
    for i in 1..=n - k {
        let len = sorted[i + k - 1] - sorted[i];
        if len < best_len {
            best_len = len;
            best_i = i;
            ties = 0;
        } else if len == best_len {
            ties += 1;
        }
    }
    interval_result(
        sorted,
        sorted[best_i],
        sorted[best_i + k - 1],
        best_len,
        EstimatorKind::MinVolume { p_lambda },
        ties,
    )
}

/// Tight window `(i, j)` holding the most points with `x_j - x_i <= v`.
pub(crate) fn max_count_window(sorted: &[f64], v_lambda: f64) -> ((usize, usize), usize) {
    let n = sorted.len();
    let mut j = 0;
    let mut best = (0, 0);
    let mut best_count = 0;
    let mut ties = 0;
    for i in 0..n {
        j = j.max(i);
        while j + 1 < n && sorted[j + 1] - sorted[i] <= v_lambda {
            j += 1;
        }
        let count = j - i + 1;
        if count > best_count {
            best = (i, j);
            best_count = count;
            ties = 0;
        } else if count == best_count {
            ties += 1;
        }
    }
    (best, ties)
}

/// Window of width at most `v_lambda` containing the most sample points,
/// returned as the tight interval between the extreme points it contains.
pub fn max_prob_1d(sorted: &[f64], v_lambda: f64) -> Result<EstimateResult> {
    check_sorted(sorted)?;
    check_param("v_lambda", v_lambda, true)?;
    let ((i, j), ties) = max_count_window(sorted, v_lambda);
    interval_result(
        sorted,
        sorted[i],
        sorted[j],
        (j - i + 1) as f64 / sorted.len() as f64,
        EstimatorKind::MaxProb { v_lambda },
        ties,
    )
}

/// Widens `[a, b]` symmetrically to length `v`. Requires `b - a <= v`.
pub(crate) fn widen(a: f64, b: f64, v: f64) -> (f64, f64) {
    let pad = 0.5 * (v - (b - a));
    (a - pad, b + pad)
}

/// The max-prob window widened symmetrically to length exactly `v_lambda`.
pub fn max_prob_equal_vol_1d(sorted: &[f64], v_lambda: f64) -> Result<EstimateResult> {
    check_sorted(sorted)?;
    check_param("v_lambda", v_lambda, true)?;
    let ((i, j), ties) = max_count_window(sorted, v_lambda);
    let (lo, hi) = widen(sorted[i], sorted[j], v_lambda);
    let count = count_between(sorted, lo, hi);
    interval_result(
        sorted,
        lo,
        hi,
        count as f64 / sorted.len() as f64,
        EstimatorKind::MaxProbEqualVol { v_lambda },
        ties,
    )
}
