use serde::{Deserialize, Serialize};

use super::body::{ConvexBody, Ellipse, Point2};
use crate::error::{Error, Result};

/// Metric projection of a point onto the boundary of a body.
///
/// The query point is recovered as `pi + s * u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProjection {
    /// Nearest boundary point.
    pub pi: Vec<f64>,
    /// Outer unit normal at `pi`.
    pub u: Vec<f64>,
    /// Signed distance, positive outside the body.
    pub s: f64,
}

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 100;

/// Projects `x` onto the boundary of `body`.
pub fn project(body: &ConvexBody, x: &[f64]) -> Result<BoundaryProjection> {
    if x.len() != body.dimension() {
        return Err(Error::DimensionMismatch {
            expected: body.dimension(),
            got: x.len(),
        });
    }
    match body {
        ConvexBody::Interval { a, b } => project_interval(*a, *b, x[0]),
        ConvexBody::Ball { center, radius } => project_ball(*center, *radius, [x[0], x[1]]),
        ConvexBody::Ellipsoid(e) => project_ellipse(e, [x[0], x[1]]),
    }
}

fn project_interval(a: f64, b: f64, x: f64) -> Result<BoundaryProjection> {
    let mid = 0.5 * (a + b);
    if a == b {
        // A single point has no interior; only the side of `a` is meaningful.
        if x == a {
            return Err(Error::DegenerateBody);
        }
    } else if x == mid {
        return Err(Error::SkeletonPoint);
    }
    let (pi, u, s) = if x > mid {
        (b, 1.0, x - b)
    } else {
        (a, -1.0, a - x)
    };
    Ok(BoundaryProjection {
        pi: vec![pi],
        u: vec![u],
        s,
    })
}

fn project_ball(center: Point2, radius: f64, x: Point2) -> Result<BoundaryProjection> {
    let d = [x[0] - center[0], x[1] - center[1]];
    let norm = d[0].hypot(d[1]);
    if norm == 0.0 {
        return Err(Error::SkeletonPoint);
    }
    let u = [d[0] / norm, d[1] / norm];
    Ok(BoundaryProjection {
        pi: vec![center[0] + radius * u[0], center[1] + radius * u[1]],
        u: u.to_vec(),
        s: norm - radius,
    })
}

/// Nearest point on the axis-aligned ellipse `y1^2/a^2 + y2^2/b^2 = 1`
/// (a >= b) to `y` with `y1, y2 >= 0`.
///
/// The foot point is `p_i = a_i^2 y_i / (t + a_i^2)` where `t` is the root of
/// `F(t) = sum (a_i y_i / (t + a_i^2))^2 - 1` on `(-b^2, inf)`. `F` is
/// decreasing and convex there, so Newton is run inside a shrinking bracket
/// and falls back to bisection whenever a step leaves it.
fn ellipse_foot(a: f64, b: f64, y: Point2) -> Point2 {
    let (y1, y2) = (y[0], y[1]);
    if y2 == 0.0 {
        let crit = (a * a - b * b) / a;
        if y1 < crit {
            // Inside, on the major axis: two nearest points, take the upper one.
            let p1 = a * a * y1 / (a * a - b * b);
            let p2 = b * (1.0 - (p1 / a) * (p1 / a)).max(0.0).sqrt();
            return [p1, p2];
        }
        return [a, 0.0];
    }
    let f = |t: f64| {
        let r1 = a * y1 / (t + a * a);
        let r2 = b * y2 / (t + b * b);
        r1 * r1 + r2 * r2 - 1.0
    };
    let df = |t: f64| {
        let d1 = t + a * a;
        let d2 = t + b * b;
        -2.0 * (a * a * y1 * y1 / (d1 * d1 * d1) + b * b * y2 * y2 / (d2 * d2 * d2))
    };
    let mut lo = -b * b + b * y2; // F(lo) >= 0 since the second term alone is >= 1
    let mut hi = a * y1.hypot(y2).max(f64::MIN_POSITIVE);
    if f(hi) > 0.0 {
        hi = (a * a + y1 * a).max(hi * 2.0);
    }
    let mut t = if f(0.0) > 0.0 { 0.0f64.max(lo) } else { lo };
    for _ in 0..NEWTON_MAX_ITER {
        let ft = f(t);
        if ft > 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        let step = ft / df(t);
        let mut next = t - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= NEWTON_TOL * (1.0 + t.abs())
            || hi - lo <= NEWTON_TOL * (1.0 + t.abs())
        {
            t = next;
            break;
        }
        t = next;
    }
    [a * a * y1 / (t + a * a), b * b * y2 / (t + b * b)]
}

fn project_ellipse(e: &Ellipse, x: Point2) -> Result<BoundaryProjection> {
    let (a, b, _) = e.axes();
    let y = e.to_local(x);
    if y[0] == 0.0 && y[1] == 0.0 {
        return Err(Error::SkeletonPoint);
    }
    let foot = ellipse_foot(a, b, [y[0].abs(), y[1].abs()]);
    let p = [foot[0].copysign(y[0]), foot[1].copysign(y[1])];
    let n = [p[0] / (a * a), p[1] / (b * b)];
    let nn = n[0].hypot(n[1]);
    let u_local = [n[0] / nn, n[1] / nn];
    let outside = (y[0] / a).powi(2) + (y[1] / b).powi(2) > 1.0;
    let dist = (y[0] - p[0]).hypot(y[1] - p[1]);
    let s = if outside { dist } else { -dist };
    let pi = e.to_global(p);
    let u = e.rotate(u_local);
    Ok(BoundaryProjection {
        pi: pi.to_vec(),
        u: u.to_vec(),
        s,
    })
}

/// Signed distance from `x` to the boundary; skeleton points are inside.
pub fn signed_distance(body: &ConvexBody, x: &[f64]) -> Result<f64> {
    match project(body, x) {
        Ok(p) => Ok(p.s),
        Err(Error::SkeletonPoint) => Ok(-body.inradius()),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ellipse;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn interval_example() {
        let body = ConvexBody::interval(0.0, 1.0).unwrap();
        let p = project(&body, &[1.3]).unwrap();
        assert_eq!(p.pi, vec![1.0]);
        assert_eq!(p.u, vec![1.0]);
        assert!((p.s - 0.3).abs() < 1e-15);
        let p = project(&body, &[0.2]).unwrap();
        assert_eq!((p.pi[0], p.u[0]), (0.0, -1.0));
        assert!((p.s + 0.2).abs() < 1e-15);
        assert!(matches!(project(&body, &[0.5]), Err(Error::SkeletonPoint)));
    }

    #[test]
    fn degenerate_interval_by_side() {
        let body = ConvexBody::interval(0.5, 0.5).unwrap();
        let p = project(&body, &[0.7]).unwrap();
        assert_eq!(p.u, vec![1.0]);
        let p = project(&body, &[0.1]).unwrap();
        assert_eq!(p.u, vec![-1.0]);
        assert!((p.s - 0.4).abs() < 1e-15);
        assert!(matches!(project(&body, &[0.5]), Err(Error::DegenerateBody)));
    }

    #[test]
    fn ball_radial_example() {
        let body = ConvexBody::ball([0.0, 0.0], 1.0).unwrap();
        let p = project(&body, &[1.2, 0.0]).unwrap();
        assert!(close(&p.pi, &[1.0, 0.0], 1e-15));
        assert!(close(&p.u, &[1.0, 0.0], 1e-15));
        assert!((p.s - 0.2).abs() < 1e-15);
        assert!(matches!(
            project(&body, &[0.0, 0.0]),
            Err(Error::SkeletonPoint)
        ));
        assert!(matches!(
            project(&body, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    /// Dense boundary sampling as an independent check of the Newton solve.
    fn brute_nearest(e: &Ellipse, x: Point2) -> (Point2, f64) {
        let body = ConvexBody::Ellipsoid(e.clone());
        let mut best = ([0.0, 0.0], f64::INFINITY);
        let m = 200_000;
        for k in 0..m {
            let t = k as f64 / m as f64 * std::f64::consts::TAU;
            let p = body.boundary_point(t);
            let d = (p[0] - x[0]).hypot(p[1] - x[1]);
            if d < best.1 {
                best = (p, d);
            }
        }
        best
    }

    #[test]
    fn ellipse_example_matches_dense_sampling() {
        let body = ConvexBody::ellipse([0.0, 0.0], [[4.0, 0.0], [0.0, 1.0]]).unwrap();
        let p = project(&body, &[3.0, 0.0]).unwrap();
        assert!(close(&p.pi, &[2.0, 0.0], 1e-12));
        assert!(close(&p.u, &[1.0, 0.0], 1e-12));
        assert!((p.s - 1.0).abs() < 1e-12);

        let e = Ellipse::from_axes([0.3, -0.2], 2.0, 0.7, 0.4).unwrap();
        let body = ConvexBody::Ellipsoid(e.clone());
        for x in [[2.5, 1.0], [0.1, 0.1], [-1.0, 0.8], [0.3, 3.0], [1.2, -0.5]] {
            let p = project(&body, &x).unwrap();
            let (bp, bd) = brute_nearest(&e, x);
            assert!((p.s.abs() - bd).abs() < 1e-6, "{x:?}: {} vs {bd}", p.s);
            assert!(close(&p.pi, &bp, 1e-3), "{x:?}");
        }
    }

    #[test]
    fn ellipse_major_axis_inside_is_reconstructed() {
        let body = ConvexBody::ellipse([0.0, 0.0], [[4.0, 0.0], [0.0, 1.0]]).unwrap();
        for x in [0.5, -1.0, 1.6, 1.9] {
            let p = project(&body, &[x, 0.0]).unwrap();
            assert!((p.pi[0] + p.s * p.u[0] - x).abs() < 1e-12);
            assert!((p.pi[1] + p.s * p.u[1]).abs() < 1e-12);
            assert!(p.s < 0.0);
        }
    }
}
