use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];

/// Parametric convex body: a closed interval on the line, or a disc or
/// ellipse in the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexBody {
    Interval { a: f64, b: f64 },
    Ball { center: Point2, radius: f64 },
    Ellipsoid(Ellipse),
}

/// Ellipse `{x : (x - c)^T Q^{-1} (x - c) <= 1}` with symmetric positive
/// definite shape matrix `Q`; its eigenvalues are the squared semi-axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EllipseRepr", into = "EllipseRepr")]
pub struct Ellipse {
    center: Point2,
    shape: [[f64; 2]; 2],
    inv: [[f64; 2]; 2],
    semi_major: f64,
    semi_minor: f64,
    angle: f64,
}

#[derive(Serialize, Deserialize)]
struct EllipseRepr {
    center: Point2,
    shape: [[f64; 2]; 2],
}

impl TryFrom<EllipseRepr> for Ellipse {
    type Error = Error;
    fn try_from(r: EllipseRepr) -> Result<Self> {
        Ellipse::new(r.center, r.shape)
    }
}

impl From<Ellipse> for EllipseRepr {
    fn from(e: Ellipse) -> Self {
        EllipseRepr {
            center: e.center,
            shape: e.shape,
        }
    }
}

impl Ellipse {
    pub fn new(center: Point2, shape: [[f64; 2]; 2]) -> Result<Self> {
        let [[p, q], [q2, r]] = shape;
        if !(center.iter().all(|v| v.is_finite()) && [p, q, q2, r].iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidBody("non-finite ellipse parameters".into()));
        }
        if (q - q2).abs() > 1e-12 * (1.0 + q.abs()) {
            return Err(Error::InvalidBody("shape matrix is not symmetric".into()));
        }
        let mean = 0.5 * (p + r);
        let diff = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        let (l1, l2) = (mean + diff, mean - diff);
        if !(l2 > 0.0) {
            return Err(Error::InvalidBody(
                "shape matrix is not positive definite".into(),
            ));
        }
        let det = p * r - q * q;
        let inv = [[r / det, -q / det], [-q / det, p / det]];
        let angle = if diff == 0.0 {
            0.0
        } else {
            0.5 * (2.0 * q).atan2(p - r)
        };
        Ok(Ellipse {
            center,
            shape: [[p, q], [q, r]],
            inv,
            semi_major: l1.sqrt(),
            semi_minor: l2.sqrt(),
            angle,
        })
    }

    /// Builds an ellipse from semi-axes and the angle of the first axis.
    pub fn from_axes(center: Point2, axis1: f64, axis2: f64, angle: f64) -> Result<Self> {
        if !(axis1 > 0.0 && axis2 > 0.0) {
            return Err(Error::InvalidBody("semi-axes must be positive".into()));
        }
        let (s, c) = angle.sin_cos();
        let (a2, b2) = (axis1 * axis1, axis2 * axis2);
        let shape = [
            [c * c * a2 + s * s * b2, c * s * (a2 - b2)],
            [c * s * (a2 - b2), s * s * a2 + c * c * b2],
        ];
        Ellipse::new(center, shape)
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn shape(&self) -> [[f64; 2]; 2] {
        self.shape
    }

    /// `(semi_major, semi_minor, angle of the major axis)`.
    pub fn axes(&self) -> (f64, f64, f64) {
        (self.semi_major, self.semi_minor, self.angle)
    }

    pub fn area(&self) -> f64 {
        PI * self.semi_major * self.semi_minor
    }

    /// `(x - c)^T Q^{-1} (x - c)`; at most one inside the ellipse.
    pub fn quad_form(&self, x: Point2) -> f64 {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let [[a, b], [_, c]] = self.inv;
        a * d[0] * d[0] + 2.0 * b * d[0] * d[1] + c * d[1] * d[1]
    }

    /// Coordinates in the principal-axis frame.
    pub(crate) fn to_local(&self, x: Point2) -> Point2 {
        let (s, c) = self.angle.sin_cos();
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        [c * d[0] + s * d[1], -s * d[0] + c * d[1]]
    }

    pub(crate) fn to_global(&self, y: Point2) -> Point2 {
        let (s, c) = self.angle.sin_cos();
        [
            self.center[0] + c * y[0] - s * y[1],
            self.center[1] + s * y[0] + c * y[1],
        ]
    }

    pub(crate) fn rotate(&self, v: Point2) -> Point2 {
        let (s, c) = self.angle.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }
}

impl ConvexBody {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a > b {
            return Err(Error::InvalidBody(format!("interval [{a}, {b}]")));
        }
        Ok(ConvexBody::Interval { a, b })
    }

    pub fn ball(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidBody(format!("ball radius {radius}")));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    pub fn ellipse(center: Point2, shape: [[f64; 2]; 2]) -> Result<Self> {
        Ellipse::new(center, shape).map(ConvexBody::Ellipsoid)
    }

    pub fn dimension(&self) -> usize {
        match self {
            ConvexBody::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Lebesgue measure (length or area).
    pub fn volume(&self) -> f64 {
        match self {
            ConvexBody::Interval { a, b } => b - a,
            ConvexBody::Ball { radius, .. } => PI * radius * radius,
            ConvexBody::Ellipsoid(e) => e.area(),
        }
    }

    /// Closed-set membership. Panics if `x` has the wrong dimension.
    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dimension(), "point dimension");
        match self {
            ConvexBody::Interval { a, b } => *a <= x[0] && x[0] <= *b,
            _ => self.contains2([x[0], x[1]]),
        }
    }

    pub fn contains2(&self, x: Point2) -> bool {
        match self {
            ConvexBody::Interval { .. } => false,
            ConvexBody::Ball { center, radius } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            ConvexBody::Ellipsoid(e) => e.quad_form(x) <= 1.0,
        }
    }

    /// Center (midpoint for intervals), padded to two coordinates.
    pub fn center2(&self) -> Point2 {
        match self {
            ConvexBody::Interval { a, b } => [0.5 * (a + b), 0.0],
            ConvexBody::Ball { center, .. } => *center,
            ConvexBody::Ellipsoid(e) => e.center(),
        }
    }

    /// Axis-aligned bounding box `[xmin, xmax, ymin, ymax]` of a planar body.
    pub fn bounding_box(&self) -> [f64; 4] {
        match self {
            ConvexBody::Interval { a, b } => [*a, *b, 0.0, 0.0],
            ConvexBody::Ball { center, radius } => [
                center[0] - radius,
                center[0] + radius,
                center[1] - radius,
                center[1] + radius,
            ],
            ConvexBody::Ellipsoid(e) => {
                let [[p, _], [_, r]] = e.shape();
                let c = e.center();
                let (hx, hy) = (p.sqrt(), r.sqrt());
                [c[0] - hx, c[0] + hx, c[1] - hy, c[1] + hy]
            }
        }
    }

    /// Point on the boundary of a planar body at parameter `t` in `[0, 2pi)`.
    pub fn boundary_point(&self, t: f64) -> Point2 {
        let (s, c) = t.sin_cos();
        match self {
            ConvexBody::Interval { .. } => panic!("boundary_point on an interval"),
            ConvexBody::Ball { center, radius } => [center[0] + radius * c, center[1] + radius * s],
            ConvexBody::Ellipsoid(e) => {
                let (a, b, _) = e.axes();
                e.to_global([a * c, b * s])
            }
        }
    }

    /// Parameter range `[t0, t1]` on which `origin + t * dir` lies in a
    /// planar body, or `None` if the line misses it.
    pub fn line_interval(&self, origin: Point2, dir: Point2) -> Option<(f64, f64)> {
        let (qa, qb, qc) = match self {
            ConvexBody::Interval { .. } => return None,
            ConvexBody::Ball { center, radius } => {
                let d = [origin[0] - center[0], origin[1] - center[1]];
                (
                    dir[0] * dir[0] + dir[1] * dir[1],
                    2.0 * (d[0] * dir[0] + d[1] * dir[1]),
                    d[0] * d[0] + d[1] * d[1] - radius * radius,
                )
            }
            ConvexBody::Ellipsoid(e) => {
                let [[a, b], [_, c]] = e.inv;
                let ctr = e.center();
                let d = [origin[0] - ctr[0], origin[1] - ctr[1]];
                let qa = a * dir[0] * dir[0] + 2.0 * b * dir[0] * dir[1] + c * dir[1] * dir[1];
                let qb = 2.0
                    * (a * d[0] * dir[0] + b * (d[0] * dir[1] + d[1] * dir[0]) + c * d[1] * dir[1]);
                let qc = a * d[0] * d[0] + 2.0 * b * d[0] * d[1] + c * d[1] * d[1] - 1.0;
                (qa, qb, qc)
            }
        };
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 || qa <= 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        // Numerically stable pair of roots.
        let q = -0.5 * (qb + qb.signum() * sq);
        let (r1, r2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / qa, qc / q)
        };
        Some((r1.min(r2), r1.max(r2)))
    }

    /// Radius of the largest inscribed ball.
    pub fn inradius(&self) -> f64 {
        match self {
            ConvexBody::Interval { a, b } => 0.5 * (b - a),
            ConvexBody::Ball { radius, .. } => *radius,
            ConvexBody::Ellipsoid(e) => e.axes().1,
        }
    }
}
