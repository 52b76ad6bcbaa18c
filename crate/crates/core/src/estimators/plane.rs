//! Planar estimators over discs and ellipses by multi-start simplex search.
//!
//! The search runs over the center (and, for ellipses, log-aspect ratio and
//! orientation) only. For a fixed center and shape the best scale follows
//! from the order statistics of the normalized squared distances `q`, so the
//! profiled objectives are exact:
//!
//! * min-volume: area `pi q_(k)` of the smallest scaled copy holding `k` points;
//! * excess-mass: `max_m m/n - lambda pi q_(m)`;
//! * max-prob: the largest `m` whose min-volume set fits in `v_lambda`.

use std::f64::consts::PI;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{required_count, Diagnostics, EstimateResult, EstimatorKind, SetClass};
use crate::error::{Error, Result};
use crate::geometry::{min_enclosing_circle, ConvexBody, Ellipse, Point2};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::rng::{derive_seed, rng_from_seed};

/// Log-aspect ratios are clamped to this magnitude.
const MAX_LOG_ASPECT: f64 = 12.0;
/// Smallest scale of a returned body; single-point optima are tiny discs.
const MIN_SCALE: f64 = 1e-100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Simplex tolerance on objective spread and parameter diameter.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 16,
            tol: 1e-8,
            max_iter: 2000,
            seed: 0,
        }
    }
}

/// Center plus optional shape parameters `(log_aspect, angle)`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Shape {
    center: Point2,
    log_aspect: f64,
    angle: f64,
}

impl Shape {
    fn from_params(class: SetClass, x: &[f64]) -> Shape {
        match class {
            SetClass::Ellipsoids => Shape {
                center: [x[0], x[1]],
                log_aspect: x[2].clamp(-MAX_LOG_ASPECT, MAX_LOG_ASPECT),
                angle: x[3],
            },
            _ => Shape {
                center: [x[0], x[1]],
                log_aspect: 0.0,
                angle: 0.0,
            },
        }
    }

    /// Squared normalized distance; the unit-scale body has area `pi`.
    fn q(&self, p: Point2) -> f64 {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        if self.log_aspect == 0.0 && self.angle == 0.0 {
            return d[0] * d[0] + d[1] * d[1];
        }
        let (s, c) = self.angle.sin_cos();
        let u = c * d[0] + s * d[1];
        let v = -s * d[0] + c * d[1];
        u * u * (-self.log_aspect).exp() + v * v * self.log_aspect.exp()
    }

    fn qs(&self, points: &[Point2]) -> Vec<f64> {
        points.iter().map(|p| self.q(*p)).collect()
    }

    fn body(&self, class: SetClass, scale: f64) -> Result<ConvexBody> {
        let s = scale.max(MIN_SCALE);
        match class {
            SetClass::Ellipsoids => {
                let h = 0.5 * self.log_aspect;
                Ellipse::from_axes(self.center, s * h.exp(), s * (-h).exp(), self.angle)
                    .map(ConvexBody::Ellipsoid)
            }
            _ => ConvexBody::ball(self.center, s),
        }
    }
}

fn kth_smallest(mut q: Vec<f64>, k: usize) -> f64 {
    let (_, v, _) = q.select_nth_unstable_by(k - 1, f64::total_cmp);
    *v
}

/// `(max_m m/n - lambda pi q_(m), argmax m)`.
fn excess_profile(mut q: Vec<f64>, lambda: f64) -> (f64, usize) {
    q.sort_by(f64::total_cmp);
    let n = q.len() as f64;
    let mut best = (f64::NEG_INFINITY, 0);
    for (idx, &v) in q.iter().enumerate() {
        let m = idx + 1;
        let val = m as f64 / n - lambda * PI * v;
        if val > best.0 {
            best = (val, m);
        }
    }
    best
}

#[derive(Clone, Copy)]
enum Profile {
    MinVolume { k: usize },
    ExcessMass { lambda: f64 },
}

impl Profile {
    /// Value to minimize.
    fn eval(&self, shape: &Shape, points: &[Point2]) -> f64 {
        match *self {
            Profile::MinVolume { k } => kth_smallest(shape.qs(points), k),
            Profile::ExcessMass { lambda } => -excess_profile(shape.qs(points), lambda).0,
        }
    }

    /// Number of points the optimal scaled copy must hold.
    fn target(&self, shape: &Shape, points: &[Point2]) -> (usize, f64) {
        match *self {
            Profile::MinVolume { k } => (k, kth_smallest(shape.qs(points), k)),
            Profile::ExcessMass { lambda } => {
                let q = shape.qs(points);
                let (_, m) = excess_profile(q.clone(), lambda);
                (m, kth_smallest(q, m))
            }
        }
    }
}

struct Searched {
    shape: Shape,
    restarts: usize,
}

fn spread(points: &[Point2]) -> f64 {
    let n = points.len() as f64;
    let mean = points
        .iter()
        .fold([0.0, 0.0], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n]);
    let var = points
        .iter()
        .map(|p| (p[0] - mean[0]).powi(2) + (p[1] - mean[1]).powi(2))
        .sum::<f64>()
        / n;
    var.sqrt().max(1e-12)
}

fn median_center(points: &[Point2]) -> Point2 {
    let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let mut ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
    let mid = points.len() / 2;
    xs.select_nth_unstable_by(mid, f64::total_cmp);
    ys.select_nth_unstable_by(mid, f64::total_cmp);
    [xs[mid], ys[mid]]
}

/// Multi-start search; restarts run in parallel and the best is chosen by
/// value, then by restart index.
fn search(
    points: &[Point2],
    class: SetClass,
    profile: Profile,
    cfg: &SearchConfig,
) -> Result<Searched> {
    let dim = if class == SetClass::Ellipsoids { 4 } else { 2 };
    let scale = spread(points);
    let opts = SimplexOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
    };
    let restarts = cfg.restarts.max(1);
    let objective = |x: &[f64]| profile.eval(&Shape::from_params(class, x), points);

    let runs: Vec<_> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, &[r as u64]));
            let center = if r == 0 {
                median_center(points)
            } else {
                points[rng.random_range(0..points.len())]
            };
            let mut x0 = vec![center[0], center[1]];
            let mut step = vec![0.25 * scale, 0.25 * scale];
            if dim == 4 {
                let (rho, theta) = if r == 0 {
                    (0.0, 0.0)
                } else {
                    (rng.random_range(-1.0..1.0), rng.random_range(0.0..PI))
                };
                x0.extend([rho, theta]);
                step.extend([0.5, 0.5]);
            }
            let first = nelder_mead(objective, &x0, &step, opts);
            // A second pass from the optimum guards against early collapse.
            let small: Vec<f64> = step.iter().map(|s| 0.1 * s).collect();
            let second = nelder_mead(objective, &first.x, &small, opts);
            let converged = first.converged || second.converged;
            if second.value <= first.value {
                (second.x, second.value, converged)
            } else {
                (first.x, first.value, converged)
            }
        })
        .collect();

    if !runs.iter().any(|r| r.2) {
        return Err(Error::SearchBudgetExceeded {
            iterations: cfg.max_iter,
        });
    }
    let (x, value, _) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.1.total_cmp(&b.1).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    let mut shape = Shape::from_params(class, &x);
    let mut value = value;

    if class == SetClass::Balls {
        // Exact polish: the smallest disc through the selected points.
        for _ in 0..50 {
            let (m, _) = profile.target(&shape, points);
            let mut order: Vec<usize> = (0..points.len()).collect();
            let q = shape.qs(points);
            order.sort_by(|&a, &b| q[a].total_cmp(&q[b]).then(a.cmp(&b)));
            let chosen: Vec<Point2> = order[..m].iter().map(|&i| points[i]).collect();
            let circle = min_enclosing_circle(&chosen, cfg.seed);
            let cand = Shape {
                center: circle.center,
                ..shape
            };
            let cand_value = profile.eval(&cand, points);
            if cand_value < value {
                shape = cand;
                value = cand_value;
            } else {
                break;
            }
        }
    }
    Ok(Searched { shape, restarts })
}

/// Smallest scaled copy of `shape` holding at least `m` points; the scale is
/// nudged up until closed-set membership agrees with the distance order.
fn scaled_body(
    points: &[Point2],
    shape: &Shape,
    class: SetClass,
    m: usize,
    q_m: f64,
) -> Result<(ConvexBody, usize)> {
    let mut scale = q_m.sqrt().max(MIN_SCALE);
    // Rounding in the center can leave a point just outside; the step
    // starts at a few ulps of the coordinates and doubles.
    let magnitude = 1.0 + shape.center[0].abs() + shape.center[1].abs();
    let mut step = 4.0 * f64::EPSILON * scale.max(magnitude * f64::EPSILON);
    for _ in 0..128 {
        let body = shape.body(class, scale)?;
        let count = points.iter().filter(|p| body.contains2(**p)).count();
        if count >= m {
            return Ok((body, count));
        }
        scale += step;
        step *= 2.0;
    }
    Err(Error::InfeasibleConstraint(format!(
        "no scaled copy holds {m} points"
    )))
}

fn min_volume(
    points: &[Point2],
    k: usize,
    class: SetClass,
    cfg: &SearchConfig,
) -> Result<(ConvexBody, usize, usize)> {
    let found = search(points, class, Profile::MinVolume { k }, cfg)?;
    let q_k = kth_smallest(found.shape.qs(points), k);
    let (body, count) = scaled_body(points, &found.shape, class, k, q_k)?;
    Ok((body, count, found.restarts))
}

fn with_scale(body: &ConvexBody, volume: f64) -> Result<ConvexBody> {
    match body {
        ConvexBody::Ball { center, .. } => ConvexBody::ball(*center, (volume / PI).sqrt()),
        ConvexBody::Ellipsoid(e) => {
            let (a, b, angle) = e.axes();
            let f = (volume / e.area()).sqrt();
            Ellipse::from_axes(e.center(), a * f, b * f, angle).map(ConvexBody::Ellipsoid)
        }
        ConvexBody::Interval { .. } => unreachable!("planar bodies only"),
    }
}

/// Largest `m` whose min-volume set fits inside volume `v_lambda`.
fn max_prob(
    points: &[Point2],
    v_lambda: f64,
    class: SetClass,
    cfg: &SearchConfig,
) -> Result<(ConvexBody, usize, usize)> {
    let n = points.len();
    let (mut lo, mut hi) = (1usize, n);
    let mut best = min_volume(points, 1, class, cfg)?;
    let mut restarts = best.2;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        let cand = min_volume(points, mid, class, cfg)?;
        restarts += cand.2;
        if cand.0.volume() <= v_lambda {
            lo = mid;
            best = cand;
        } else {
            hi = mid - 1;
        }
    }
    let (mut body, mut count, _) = best;
    if body.volume() > v_lambda {
        body = with_scale(&body, v_lambda)?;
        count = points.iter().filter(|p| body.contains2(**p)).count();
    }
    Ok((body, count, restarts))
}

/// Estimator over discs or ellipses for a planar sample.
pub fn estimate_2d(
    points: &[Point2],
    kind: &EstimatorKind,
    class: SetClass,
    cfg: &SearchConfig,
) -> Result<EstimateResult> {
    kind.validate()?;
    if class == SetClass::Intervals {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 2,
        });
    }
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "planar estimators need at least 3 points, got {n}"
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite sample point".into()));
    }
    let nf = n as f64;

    let (set, objective, count, restarts, slack) = match kind {
        EstimatorKind::MinVolume { p_lambda } => {
            let k = required_count(n, *p_lambda);
            let (body, count, r) = min_volume(points, k, class, cfg)?;
            let vol = body.volume();
            (body, vol, count, r, None)
        }
        EstimatorKind::ExcessMass { lambda } => {
            let profile = Profile::ExcessMass { lambda: *lambda };
            let found = search(points, class, profile, cfg)?;
            let (m, q_m) = profile.target(&found.shape, points);
            let (body, count) = scaled_body(points, &found.shape, class, m, q_m)?;
            let obj = count as f64 / nf - lambda * body.volume();
            (body, obj, count, found.restarts, None)
        }
        EstimatorKind::MaxProb { v_lambda } => {
            let (body, count, r) = max_prob(points, *v_lambda, class, cfg)?;
            (body, count as f64 / nf, count, r, None)
        }
        EstimatorKind::MaxProbEqualVol { v_lambda } => {
            let (body, _, r) = max_prob(points, *v_lambda, class, cfg)?;
            let body = with_scale(&body, *v_lambda)?;
            let count = points.iter().filter(|p| body.contains2(**p)).count();
            (body, count as f64 / nf, count, r, None)
        }
        EstimatorKind::Relaxed { inner, delta_n } => {
            // Restarts are visited in index order; the first whose own result
            // is within the slack of the best is returned.
            let slack = delta_n * nf.powf(-2.0 / 3.0);
            let best = estimate_2d(points, inner, class, cfg)?;
            let maximize = !matches!(**inner, EstimatorKind::MinVolume { .. });
            let mut chosen = best.clone();
            for r in 0..cfg.restarts.max(1) {
                let single = SearchConfig {
                    restarts: 1,
                    seed: derive_seed(cfg.seed, &[u64::MAX, r as u64]),
                    ..*cfg
                };
                let Ok(cand) = estimate_2d(points, inner, class, &single) else {
                    continue;
                };
                let ok = if maximize {
                    cand.objective >= best.objective - slack
                } else {
                    cand.objective <= best.objective + slack
                };
                if ok {
                    chosen = cand;
                    break;
                }
            }
            (
                chosen.set,
                chosen.objective,
                chosen.diagnostics.empirical_count,
                best.diagnostics.search_restarts,
                Some(slack),
            )
        }
    };

    // Constraints are re-checked on the final candidate.
    match kind {
        EstimatorKind::MinVolume { p_lambda } if count < required_count(n, *p_lambda) => {
            return Err(Error::InfeasibleConstraint(format!(
                "returned set holds {count} < {} points",
                required_count(n, *p_lambda)
            )));
        }
        EstimatorKind::MaxProb { v_lambda } if set.volume() > *v_lambda => {
            return Err(Error::InfeasibleConstraint(format!(
                "returned set has volume {} > {v_lambda}",
                set.volume()
            )));
        }
        _ => {}
    }

    Ok(EstimateResult {
        set,
        objective,
        kind: kind.clone(),
        n,
        diagnostics: Diagnostics {
            tie_count: 0,
            search_restarts: restarts,
            empirical_count: count,
            slack,
        },
    })
}
