//! Exhaustive O(n^2) reference implementations of the 1D estimators.

use super::line::widen;
use super::{
    check_sorted, count_between, required_count, window_excess, Diagnostics, EstimateResult,
    EstimatorKind,
};
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;

/// Largest sample accepted by the brute-force oracle.
pub const ORACLE_MAX_N: usize = 200;

/// Which of several equally good windows the oracle keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieRule {
    /// Smallest left index, then smallest right index.
    #[default]
    Lexicographic,
    /// The last optimal window in scan order. Only useful to check that
    /// comparisons against the oracle are sensitive to tie-breaking.
    Last,
}

/// Brute-force scan over all index pairs with the standard tie rule.
pub fn brute_force_oracle_1d(sorted: &[f64], kind: &EstimatorKind) -> Result<EstimateResult> {
    brute_force_oracle_1d_with(sorted, kind, TieRule::Lexicographic)
}

#[derive(Clone, Copy)]
enum Sense {
    Max,
    Min,
}

/// Scans all pairs `i <= j` in lexicographic order and returns the optimal
/// feasible pair with its objective and the number of other optimal pairs.
fn scan(
    n: usize,
    sense: Sense,
    tie: TieRule,
    mut value: impl FnMut(usize, usize) -> Option<f64>,
) -> ((usize, usize), f64, usize) {
    let mut best: Option<((usize, usize), f64)> = None;
    let mut ties = 0;
    for i in 0..n {
        for j in i..n {
            let Some(v) = value(i, j) else { continue };
            match best {
                None => best = Some(((i, j), v)),
                Some((_, bv)) => {
                    let better = match sense {
                        Sense::Max => v > bv,
                        Sense::Min => v < bv,
                    };
                    if better {
                        best = Some(((i, j), v));
                        ties = 0;
                    } else if v == bv {
                        ties += 1;
                        if tie == TieRule::Last {
                            best = Some(((i, j), v));
                        }
                    }
                }
            }
        }
    }
    let (pair, v) = best.expect("the single-point window is always feasible");
    (pair, v, ties)
}

/// First pair in lexicographic order whose objective is within `slack` of
/// `best`.
fn first_within(
    n: usize,
    sense: Sense,
    best: f64,
    slack: f64,
    mut value: impl FnMut(usize, usize) -> Option<f64>,
) -> ((usize, usize), f64) {
    for i in 0..n {
        for j in i..n {
            let Some(v) = value(i, j) else { continue };
            let ok = match sense {
                Sense::Max => v >= best - slack,
                Sense::Min => v <= best + slack,
            };
            if ok {
                return ((i, j), v);
            }
        }
    }
    unreachable!("the optimal pair is always within the slack")
}

/// Same as [`brute_force_oracle_1d`] with an explicit tie rule.
pub fn brute_force_oracle_1d_with(
    sorted: &[f64],
    kind: &EstimatorKind,
    tie: TieRule,
) -> Result<EstimateResult> {
    check_sorted(sorted)?;
    kind.validate()?;
    let n = sorted.len();
    if n > ORACLE_MAX_N {
        return Err(Error::SampleTooLarge {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    let nf = n as f64;
    let xs = sorted;

    let (lo, hi, objective, ties, slack) = match kind {
        EstimatorKind::ExcessMass { lambda } => {
            let ((i, j), v, t) = scan(n, Sense::Max, tie, |i, j| {
                Some(window_excess(xs, i, j, *lambda))
            });
            (xs[i], xs[j], v, t, None)
        }
        EstimatorKind::MinVolume { p_lambda } => {
            let k = required_count(n, *p_lambda);
            let ((i, j), v, t) = scan(n, Sense::Min, tie, |i, j| {
                (j - i + 1 >= k).then(|| xs[j] - xs[i])
            });
            (xs[i], xs[j], v, t, None)
        }
        EstimatorKind::MaxProb { v_lambda } => {
            let ((i, j), v, t) = scan(n, Sense::Max, tie, |i, j| {
                (xs[j] - xs[i] <= *v_lambda).then(|| (j - i + 1) as f64 / nf)
            });
            (xs[i], xs[j], v, t, None)
        }
        EstimatorKind::MaxProbEqualVol { v_lambda } => {
            let ((i, j), _, t) = scan(n, Sense::Max, tie, |i, j| {
                (xs[j] - xs[i] <= *v_lambda).then(|| (j - i + 1) as f64 / nf)
            });
            let (lo, hi) = widen(xs[i], xs[j], *v_lambda);
            (lo, hi, count_between(xs, lo, hi) as f64 / nf, t, None)
        }
        EstimatorKind::Relaxed { inner, delta_n } => {
            let slack = delta_n * nf.powf(-2.0 / 3.0);
            let ((i, j), v) = match **inner {
                EstimatorKind::ExcessMass { lambda } => {
                    let value = |i: usize, j: usize| Some(window_excess(xs, i, j, lambda));
                    let (_, best, _) = scan(n, Sense::Max, tie, value);
                    first_within(n, Sense::Max, best, slack, value)
                }
                EstimatorKind::MinVolume { p_lambda } => {
                    let k = required_count(n, p_lambda);
                    let value = |i: usize, j: usize| (j - i + 1 >= k).then(|| xs[j] - xs[i]);
                    let (_, best, _) = scan(n, Sense::Min, tie, value);
                    first_within(n, Sense::Min, best, slack, value)
                }
                EstimatorKind::MaxProb { v_lambda } => {
                    let value = |i: usize, j: usize| {
                        (xs[j] - xs[i] <= v_lambda).then(|| (j - i + 1) as f64 / nf)
                    };
                    let (_, best, _) = scan(n, Sense::Max, tie, value);
                    first_within(n, Sense::Max, best, slack, value)
                }
                _ => unreachable!("validated above"),
            };
            (xs[i], xs[j], v, 0, Some(slack))
        }
    };
    Ok(EstimateResult {
        set: ConvexBody::interval(lo, hi)?,
        objective,
        kind: kind.clone(),
        n,
        diagnostics: Diagnostics {
            tie_count: ties,
            search_restarts: 0,
            empirical_count: count_between(xs, lo, hi),
            slack,
        },
    })
}
