//! Minimal enclosing circle (incremental Welzl).

use rand::seq::SliceRandom;

use super::body::Point2;
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

const SLACK: f64 = 1e-12;

impl Circle {
    fn covers(&self, p: Point2) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) <= self.radius * (1.0 + SLACK)
    }
}

fn from_two(a: Point2, b: Point2) -> Circle {
    let center = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    Circle {
        center,
        radius: 0.5 * (a[0] - b[0]).hypot(a[1] - b[1]),
    }
}

fn from_three(a: Point2, b: Point2, c: Point2) -> Circle {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-300 {
        // Collinear: the farthest pair spans the circle.
        let cands = [from_two(a, b), from_two(a, c), from_two(b, c)];
        return cands
            .into_iter()
            .max_by(|x, y| x.radius.total_cmp(&y.radius))
            .unwrap();
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    Circle {
        center: [a[0] + ux, a[1] + uy],
        radius: ux.hypot(uy),
    }
}

/// Smallest circle containing every point. Empty input yields a zero circle
/// at the origin.
pub fn min_enclosing_circle(points: &[Point2], seed: u64) -> Circle {
    let mut pts = points.to_vec();
    pts.shuffle(&mut rng_from_seed(seed));
    let Some(&first) = pts.first() else {
        return Circle {
            center: [0.0, 0.0],
            radius: 0.0,
        };
    };
    let mut c = Circle {
        center: first,
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if c.covers(pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if c.covers(pts[j]) {
                continue;
            }
            c = from_two(pts[i], pts[j]);
            for k in 0..j {
                if !c.covers(pts[k]) {
                    c = from_three(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    // Make sure every point is inside despite rounding.
    let worst = pts
        .iter()
        .map(|p| (p[0] - c.center[0]).hypot(p[1] - c.center[1]))
        .fold(0.0f64, f64::max);
    c.radius = c.radius.max(worst);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over circles spanned by pairs and triples.
    fn brute(points: &[Point2]) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        let ok = |c: &Circle| {
            points
                .iter()
                .all(|p| (p[0] - c.center[0]).hypot(p[1] - c.center[1]) <= c.radius + 1e-12)
        };
        for i in 0..n {
            for j in i + 1..n {
                let c = from_two(points[i], points[j]);
                if ok(&c) {
                    best = best.min(c.radius);
                }
                for k in j + 1..n {
                    let c = from_three(points[i], points[j], points[k]);
                    if ok(&c) {
                        best = best.min(c.radius);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn matches_brute_force() {
        use rand::Rng;
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let n = rng.random_range(2..14);
            let pts: Vec<Point2> = (0..n)
                .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
                .collect();
            let c = min_enclosing_circle(&pts, 1);
            assert!((c.radius - brute(&pts)).abs() < 1e-10);
        }
    }
}
