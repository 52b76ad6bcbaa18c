//! Relaxed 1D estimators: the first window in lexicographic scan order whose
//! objective is within `delta_n * n^(-2/3)` of the optimum.

use super::line::{excess_mass_1d, max_count_window, min_volume_1d};
use super::{
    check_sorted, count_between, required_count, window_excess, Diagnostics, EstimateResult,
    EstimatorKind,
};
use crate::error::Result;
use crate::geometry::ConvexBody;

pub fn relaxed_estimate_1d(sorted: &[f64], kind: &EstimatorKind) -> Result<EstimateResult> {
    check_sorted(sorted)?;
    kind.validate()?;
    let EstimatorKind::Relaxed { inner, delta_n } = kind else {
        return super::estimate_1d(sorted, kind);
    };
    let xs = sorted;
    let n = xs.len();
    let nf = n as f64;
    let slack = delta_n * nf.powf(-2.0 / 3.0);

    let ((i, j), objective) = match **inner {
        EstimatorKind::ExcessMass { lambda } => {
            let best = excess_mass_1d(xs, lambda)?.objective;
            let threshold = best - slack;
            // Suffix argmax of (j + 1)/n - lambda x_j picks the best right end
            // for every left end.
            let mut suffix = vec![n - 1; n];
            for j in (0..n - 1).rev() {
                let k = suffix[j + 1];
                let here = (j + 1) as f64 / nf - lambda * xs[j];
                let there = (k + 1) as f64 / nf - lambda * xs[k];
                suffix[j] = if here >= there { j } else { k };
            }
            let i = (0..n)
                .find(|&i| window_excess(xs, i, suffix[i], lambda) >= threshold)
                .unwrap_or(0);
            let j = (i..n)
                .find(|&j| window_excess(xs, i, j, lambda) >= threshold)
                .unwrap_or(suffix[i]);
            ((i, j), window_excess(xs, i, j, lambda))
        }
        EstimatorKind::MinVolume { p_lambda } => {
            let best = min_volume_1d(xs, p_lambda)?.objective;
            let k = required_count(n, p_lambda);
            let i = (0..=n - k)
                .find(|&i| xs[i + k - 1] - xs[i] <= best + slack)
                .unwrap_or(0);
            ((i, i + k - 1), xs[i + k - 1] - xs[i])
        }
        EstimatorKind::MaxProb { v_lambda } => {
            let ((bi, bj), _) = max_count_window(xs, v_lambda);
            let best = (bj - bi + 1) as f64 / nf;
            let threshold = best - slack;
            let mut j = 0;
            let mut found = (bi, bj);
            for i in 0..n {
                j = j.max(i);
                while j + 1 < n && xs[j + 1] - xs[i] <= v_lambda {
                    j += 1;
                }
                if (j - i + 1) as f64 / nf >= threshold {
                    let first = (i..=j)
                        .find(|&m| (m - i + 1) as f64 / nf >= threshold)
                        .unwrap_or(j);
                    found = (i, first);
                    break;
                }
            }
            (found, (found.1 - found.0 + 1) as f64 / nf)
        }
        _ => unreachable!("validated by EstimatorKind::validate"),
    };

    let (lo, hi) = (xs[i], xs[j]);
    Ok(EstimateResult {
        set: ConvexBody::interval(lo, hi)?,
        objective,
        kind: kind.clone(),
        n,
        diagnostics: Diagnostics {
            tie_count: 0,
            search_restarts: 0,
            empirical_count: count_between(xs, lo, hi),
            slack: Some(slack),
        },
    })
}
