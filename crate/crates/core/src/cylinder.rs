//! Magnified neighbourhoods of the level-set boundary.
//!
//! A set `A` close to `L` is mapped to the cylinder set of points
//! `(boundary point, s / eps)` lying between `boundary(L)` and `boundary(A)`
//! along the outer normals, with `s` positive outside `L`. The cylinder carries
//! the product of boundary surface measure and Lebesgue measure in `s`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{signed_distance, ConvexBody, Ellipse, Point2};
use crate::models::{BoundarySide, DensityModel};

/// Default number of angles for radial graphs.
pub const DEFAULT_GRID: usize = 1024;
/// Default cap on magnified offsets.
pub const DEFAULT_CAP: f64 = 1e6;
/// Default fit residual, in magnified units, accepted by [`demagnify`].
pub const DEFAULT_FIT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CylinderSet {
    /// Outward-positive shifts of the two endpoints of an interval.
    IntervalShifts { t_left: f64, t_right: f64 },
    /// Signed normal offsets `h(theta_k)` of a disc boundary on the uniform
    /// grid `theta_k = 2 pi k / G`.
    RadialGraph { radius: f64, h: Vec<f64> },
    /// Cell indicator on `columns x rows` cells of a boundary-parameter by
    /// `[-c, c]` grid; each column carries `column_mass` of boundary measure.
    GridIndicator(GridIndicator),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridIndicator {
    pub columns: usize,
    pub rows: usize,
    pub column_mass: f64,
    pub ds: f64,
    /// Row-major per column: `cells[col * rows + row]`.
    pub cells: Vec<bool>,
}

impl GridIndicator {
    /// Center of row `row` in the `s` direction.
    pub fn row_center(&self, row: usize) -> f64 {
        -0.5 * self.rows as f64 * self.ds + (row as f64 + 0.5) * self.ds
    }

    fn cell_mass(&self) -> f64 {
        self.column_mass * self.ds
    }

    fn compatible(&self, other: &GridIndicator) -> bool {
        self.columns == other.columns
            && self.rows == other.rows
            && self.column_mass == other.column_mass
            && self.ds == other.ds
    }
}

fn between(s: f64, h: f64) -> bool {
    (h > 0.0 && s > 0.0 && s <= h) || (h < 0.0 && s <= 0.0 && s > h)
}

impl CylinderSet {
    pub fn empty_interval() -> Self {
        CylinderSet::IntervalShifts {
            t_left: 0.0,
            t_right: 0.0,
        }
    }

    /// Offsets per boundary column together with the boundary mass of each.
    fn columns(&self) -> Option<(Vec<f64>, f64)> {
        match self {
            CylinderSet::IntervalShifts { t_left, t_right } => Some((vec![*t_left, *t_right], 1.0)),
            CylinderSet::RadialGraph { radius, h } => {
                Some((h.clone(), radius * TAU / h.len().max(1) as f64))
            }
            CylinderSet::GridIndicator(_) => None,
        }
    }

    /// Smallest `c` with the set inside `|s| <= c`.
    pub fn c_bound(&self) -> f64 {
        match self {
            CylinderSet::GridIndicator(g) => {
                let mut c: f64 = 0.0;
                for col in 0..g.columns {
                    for row in 0..g.rows {
                        if g.cells[col * g.rows + row] {
                            c = c.max(g.row_center(row).abs() + 0.5 * g.ds);
                        }
                    }
                }
                c
            }
            _ => {
                let (h, _) = self.columns().expect("parametric");
                h.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
        }
    }

    /// `M(B+)`, the mass outside the level set.
    pub fn m_plus(&self) -> f64 {
        self.signed_mass(true)
    }

    /// `M(B-)`, the mass inside the level set.
    pub fn m_minus(&self) -> f64 {
        self.signed_mass(false)
    }

    fn signed_mass(&self, plus: bool) -> f64 {
        match self {
            CylinderSet::GridIndicator(g) => {
                let mut count = 0usize;
                for col in 0..g.columns {
                    for row in 0..g.rows {
                        let outside = g.row_center(row) > 0.0;
                        if g.cells[col * g.rows + row] && outside == plus {
                            count += 1;
                        }
                    }
                }
                count as f64 * g.cell_mass()
            }
            _ => {
                let (h, w) = self.columns().expect("parametric");
                w * h
                    .iter()
                    .map(|&v| if plus { v.max(0.0) } else { (-v).max(0.0) })
                    .sum::<f64>()
            }
        }
    }

    /// Converts a parametric set to a cell grid with step `ds` on `[-c, c]`.
    pub fn to_grid(&self, ds: f64, c: f64) -> Result<GridIndicator> {
        if let CylinderSet::GridIndicator(g) = self {
            return Ok(g.clone());
        }
        if !(ds > 0.0 && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid step {ds}, bound {c}"
            )));
        }
        let (h, column_mass) = self.columns().expect("parametric");
        let rows = 2 * (c / ds).ceil() as usize;
        let mut g = GridIndicator {
            columns: h.len(),
            rows,
            column_mass,
            ds,
            cells: vec![false; h.len() * rows],
        };
        for (col, &hv) in h.iter().enumerate() {
            for row in 0..rows {
                g.cells[col * rows + row] = between(g.row_center(row), hv);
            }
        }
        Ok(g)
    }
}

/// `M(B)`.
pub fn m_measure(b: &CylinderSet) -> f64 {
    b.m_plus() + b.m_minus()
}

fn paired_columns(b: &CylinderSet, b2: &CylinderSet) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (Some((h1, w1)), Some((h2, w2))) = (b.columns(), b2.columns()) else {
        return Err(Error::IncompatibleRepresentations(
            "not both parametric".into(),
        ));
    };
    if h1.len() != h2.len() || w1 != w2 {
        return Err(Error::IncompatibleRepresentations(
            "different boundary parameterizations".into(),
        ));
    }
    Ok((h1, h2, w1))
}

fn grid_pair(b: &CylinderSet, b2: &CylinderSet) -> Result<(GridIndicator, GridIndicator)> {
    let template = match (b, b2) {
        (CylinderSet::GridIndicator(g), _) | (_, CylinderSet::GridIndicator(g)) => g.clone(),
        _ => {
            return Err(Error::IncompatibleRepresentations(
                "no common parameterization or grid".into(),
            ))
        }
    };
    let c = 0.5 * template.rows as f64 * template.ds;
    let g1 = b.to_grid(template.ds, c)?;
    let g2 = b2.to_grid(template.ds, c)?;
    if !g1.compatible(&g2) {
        return Err(Error::IncompatibleRepresentations(
            "grid geometries differ".into(),
        ));
    }
    Ok((g1, g2))
}

/// `M(B △ B2)`.
pub fn m_sym_diff(b: &CylinderSet, b2: &CylinderSet) -> Result<f64> {
    if let Ok((h1, h2, w)) = paired_columns(b, b2) {
        // The segments [0, h] and [0, h'] differ by |h - h'| whatever the signs.
        return Ok(w * h1.iter().zip(&h2).map(|(x, y)| (x - y).abs()).sum::<f64>());
    }
    let (g1, g2) = grid_pair(b, b2)?;
    let count = g1
        .cells
        .iter()
        .zip(&g2.cells)
        .filter(|(x, y)| x != y)
        .count();
    Ok(count as f64 * g1.cell_mass())
}

/// `M(B ∩ B2)`.
pub fn m_intersection(b: &CylinderSet, b2: &CylinderSet) -> Result<f64> {
    if let Ok((h1, h2, w)) = paired_columns(b, b2) {
        return Ok(w * h1
            .iter()
            .zip(&h2)
            .map(|(x, y)| {
                if x * y > 0.0 {
                    x.abs().min(y.abs())
                } else {
                    0.0
                }
            })
            .sum::<f64>());
    }
    let (g1, g2) = grid_pair(b, b2)?;
    let count = g1
        .cells
        .iter()
        .zip(&g2.cells)
        .filter(|(x, y)| **x && **y)
        .count();
    Ok(count as f64 * g1.cell_mass())
}

/// `d(B, B2) = sqrt(M(B △ B2))`.
pub fn d_metric(b: &CylinderSet, b2: &CylinderSet) -> Result<f64> {
    m_sym_diff(b, b2).map(f64::sqrt)
}

/// `|M(B+) - M(B-)| <= tol`.
pub fn is_in_bstar(b: &CylinderSet, tol: f64) -> bool {
    (b.m_plus() - b.m_minus()).abs() <= tol
}

pub type BoundaryFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One-sided normal derivatives of the density along the boundary; the
/// argument is the endpoint index (0 or 1) in 1D and the angle in 2D.
#[derive(Clone)]
pub struct DriftSpec {
    pub f_plus: BoundaryFn,
    pub f_minus: BoundaryFn,
    pub lambda: f64,
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftSpec")
            .field("f_plus(0)", &(self.f_plus)(0.0))
            .field("f_minus(0)", &(self.f_minus)(0.0))
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl DriftSpec {
    pub fn constant(f_plus: f64, f_minus: f64, lambda: f64) -> Self {
        DriftSpec {
            f_plus: Arc::new(move |_| f_plus),
            f_minus: Arc::new(move |_| f_minus),
            lambda,
        }
    }

    /// Different constant slopes at the two endpoints of an interval, equal
    /// on both sides of each endpoint.
    pub fn endpoints(g_left: f64, g_right: f64, lambda: f64) -> Self {
        let g = move |p: f64| if p < 0.5 { g_left } else { g_right };
        DriftSpec {
            f_plus: Arc::new(g),
            f_minus: Arc::new(g),
            lambda,
        }
    }

    pub fn from_model(model: &DensityModel) -> Self {
        let (m1, m2) = (model.clone(), model.clone());
        DriftSpec {
            f_plus: Arc::new(move |p| m1.boundary_derivative(BoundarySide::Plus, p)),
            f_minus: Arc::new(move |p| m2.boundary_derivative(BoundarySide::Minus, p)),
            lambda: model.lambda(),
        }
    }

    /// Slope applying to offset `s` at boundary parameter `param`.
    pub fn slope(&self, param: f64, s: f64) -> f64 {
        if s > 0.0 {
            (self.f_plus)(param)
        } else {
            (self.f_minus)(param)
        }
    }
}

/// Drift measure `D(B) = int_B |s| f'(side) dM`.
pub fn drift_d(b: &CylinderSet, spec: &DriftSpec) -> f64 {
    match b {
        CylinderSet::IntervalShifts { t_left, t_right } => {
            0.5 * spec.slope(0.0, *t_left) * t_left * t_left
                + 0.5 * spec.slope(1.0, *t_right) * t_right * t_right
        }
        CylinderSet::RadialGraph { radius, h } => {
            let g = h.len() as f64;
            radius * TAU / g
                * h.iter()
                    .enumerate()
                    .map(|(k, v)| 0.5 * spec.slope(TAU * k as f64 / g, *v) * v * v)
                    .sum::<f64>()
        }
        CylinderSet::GridIndicator(g) => {
            let param = |col: usize| {
                if g.columns == 2 {
                    col as f64
                } else {
                    TAU * col as f64 / g.columns as f64
                }
            };
            let mut total = 0.0;
            for col in 0..g.columns {
                for row in 0..g.rows {
                    if g.cells[col * g.rows + row] {
                        let s = g.row_center(row);
                        total += s.abs() * spec.slope(param(col), s);
                    }
                }
            }
            total * g.cell_mass()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagnifyOptions {
    pub grid: usize,
    pub cap: f64,
}

impl Default for MagnifyOptions {
    fn default() -> Self {
        MagnifyOptions {
            grid: DEFAULT_GRID,
            cap: DEFAULT_CAP,
        }
    }
}

/// Magnified image of `A △ L` with default grid and cap.
pub fn magnify(l: &ConvexBody, a: &ConvexBody, eps: f64) -> Result<CylinderSet> {
    magnify_with(l, a, eps, MagnifyOptions::default())
}

pub fn magnify_with(
    l: &ConvexBody,
    a: &ConvexBody,
    eps: f64,
    opts: MagnifyOptions,
) -> Result<CylinderSet> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let set = match (l, a) {
        (ConvexBody::Interval { a: la, b: lb }, ConvexBody::Interval { a: aa, b: ab }) => {
            CylinderSet::IntervalShifts {
                t_left: (la - aa) / eps,
                t_right: (ab - lb) / eps,
            }
        }
        (
            ConvexBody::Ball { center, radius },
            ConvexBody::Ball { .. } | ConvexBody::Ellipsoid(_),
        ) => {
            if opts.grid < 3 {
                return Err(Error::InvalidParameter(
                    "radial grid needs 3 or more angles".into(),
                ));
            }
            let mut h = Vec::with_capacity(opts.grid);
            for k in 0..opts.grid {
                let theta = TAU * k as f64 / opts.grid as f64;
                let u = [theta.cos(), theta.sin()];
                let pi = [center[0] + radius * u[0], center[1] + radius * u[1]];
                // The far crossing of the normal line is the boundary of A when
                // A is star-shaped about the normal line's inner part.
                let Some((_, t1)) = a.line_interval(pi, u) else {
                    return Err(Error::NotParallel { c: f64::INFINITY });
                };
                if t1 <= -radius {
                    return Err(Error::NotParallel { c: f64::INFINITY });
                }
                h.push(t1 / eps);
            }
            CylinderSet::RadialGraph { radius: *radius, h }
        }
        (ConvexBody::Ball { .. }, ConvexBody::Interval { .. })
        | (ConvexBody::Interval { .. }, _) => {
            return Err(Error::DimensionMismatch {
                expected: l.dimension(),
                got: a.dimension(),
            })
        }
        (ConvexBody::Ellipsoid(_), _) => {
            return Err(Error::UnsupportedBody(
                "magnification needs an interval or disc level set".into(),
            ))
        }
    };
    let c = set.c_bound();
    if c > opts.cap {
        return Err(Error::NotParallel { c });
    }
    Ok(set)
}

/// Result of mapping a cylinder set back to a convex body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Demagnified {
    pub body: ConvexBody,
    /// RMS boundary misfit in magnified units (zero for intervals).
    pub residual: f64,
}

/// Inverse of [`magnify`] with the default fit tolerance.
pub fn demagnify(l: &ConvexBody, b: &CylinderSet, eps: f64) -> Result<Demagnified> {
    demagnify_with(l, b, eps, DEFAULT_FIT_TOL)
}

pub fn demagnify_with(l: &ConvexBody, b: &CylinderSet, eps: f64, tol: f64) -> Result<Demagnified> {
    match (l, b) {
        (ConvexBody::Interval { a, b: lb }, CylinderSet::IntervalShifts { t_left, t_right }) => {
            let lo = a - t_left * eps;
            let hi = lb + t_right * eps;
            Ok(Demagnified {
                body: ConvexBody::interval(lo, hi)?,
                residual: 0.0,
            })
        }
        (ConvexBody::Ball { center, radius }, CylinderSet::RadialGraph { h, .. }) => {
            if h.iter().all(|v| *v == 0.0) {
                return Ok(Demagnified {
                    body: l.clone(),
                    residual: 0.0,
                });
            }
            let g = h.len() as f64;
            let pts: Vec<Point2> = h
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let t = TAU * k as f64 / g;
                    let rho = radius + eps * v;
                    [center[0] + rho * t.cos(), center[1] + rho * t.sin()]
                })
                .collect();
            let rms = |body: &ConvexBody| -> Result<f64> {
                let mut sum = 0.0;
                for p in &pts {
                    let s = signed_distance(body, p)?;
                    sum += s * s;
                }
                Ok((sum / pts.len() as f64).sqrt() / eps)
            };

            let circle = fit_circle(&pts, *center, *radius)?;
            let circle_res = rms(&circle)?;
            if circle_res <= tol {
                return Ok(Demagnified {
                    body: circle,
                    residual: circle_res,
                });
            }
            let mut best = (circle, circle_res);
            if let Ok(ellipse) = fit_ellipse(&pts, *center, *radius) {
                let res = rms(&ellipse)?;
                if res < best.1 {
                    best = (ellipse, res);
                }
            }
            if best.1 <= tol {
                Ok(Demagnified {
                    body: best.0,
                    residual: best.1,
                })
            } else {
                Err(Error::NonRepresentable {
                    residual: best.1,
                    tolerance: tol,
                })
            }
        }
        _ => Err(Error::IncompatibleRepresentations(
            "demagnify needs interval shifts over an interval or a radial graph over a disc".into(),
        )),
    }
}

fn lstsq(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Vec<f64>> {
    let m = rows.len();
    let k = rows[0].len();
    let a = DMatrix::from_fn(m, k, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let x = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("least squares failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// Algebraic circle fit in coordinates normalized by the level set.
fn fit_circle(pts: &[Point2], c0: Point2, r0: f64) -> Result<ConvexBody> {
    let local: Vec<Point2> = pts
        .iter()
        .map(|p| [(p[0] - c0[0]) / r0, (p[1] - c0[1]) / r0])
        .collect();
    let rows = local.iter().map(|p| vec![p[0], p[1], 1.0]).collect();
    let rhs = local.iter().map(|p| -(p[0] * p[0] + p[1] * p[1])).collect();
    let x = lstsq(rows, rhs)?;
    let (cx, cy) = (-0.5 * x[0], -0.5 * x[1]);
    let r2 = cx * cx + cy * cy - x[2];
    if !(r2 > 0.0) {
        return Err(Error::NonRepresentable {
            residual: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    ConvexBody::ball([c0[0] + r0 * cx, c0[1] + r0 * cy], r0 * r2.sqrt())
}

/// Algebraic conic fit with trace normalization `A + C = 1`.
fn fit_ellipse(pts: &[Point2], c0: Point2, r0: f64) -> Result<ConvexBody> {
    let local: Vec<Point2> = pts
        .iter()
        .map(|p| [(p[0] - c0[0]) / r0, (p[1] - c0[1]) / r0])
        .collect();
    // (1 - C) x^2 + B xy + C y^2 + D x + E y + F = 0
    let rows = local
        .iter()
        .map(|p| vec![p[1] * p[1] - p[0] * p[0], p[0] * p[1], p[0], p[1], 1.0])
        .collect();
    let rhs = local.iter().map(|p| -p[0] * p[0]).collect();
    let x = lstsq(rows, rhs)?;
    let (cc, bb, dd, ee, ff) = (x[0], x[1], x[2], x[3], x[4]);
    let aa = 1.0 - cc;
    let det = 4.0 * aa * cc - bb * bb;
    let bad = || Error::NonRepresentable {
        residual: f64::INFINITY,
        tolerance: 0.0,
    };
    if !(det > 0.0) {
        return Err(bad());
    }
    let cx = (-2.0 * cc * dd + bb * ee) / det;
    let cy = (bb * dd - 2.0 * aa * ee) / det;
    let fc = ff + 0.5 * (dd * cx + ee * cy);
    if !(fc < 0.0) {
        return Err(bad());
    }
    // Centered conic x^T M x = -fc; shape matrix Q = -fc M^{-1}.
    let m = [[aa, 0.5 * bb], [0.5 * bb, cc]];
    let mdet = m[0][0] * m[1][1] - m[0][1] * m[0][1];
    let s = -fc / mdet * r0 * r0;
    let shape = [[s * m[1][1], -s * m[0][1]], [-s * m[0][1], s * m[0][0]]];
    Ellipse::new([c0[0] + r0 * cx, c0[1] + r0 * cy], shape).map(ConvexBody::Ellipsoid)
}

/// `e_lambda(L \ A)` and `e_lambda(A \ L)`.
fn split_excess(model: &DensityModel, a: &ConvexBody) -> Result<(f64, f64)> {
    let parts = model.split_sym_diff(a)?;
    let lambda = model.lambda();
    Ok((
        parts.p_inside - lambda * parts.mu_inside,
        parts.p_outside - lambda * parts.mu_outside,
    ))
}

/// `n^(2/3) (e_lambda(C-) - e_lambda(C+))` for `C = A △ L`.
pub fn empirical_drift_dn(model: &DensityModel, a: &ConvexBody, n: usize) -> Result<f64> {
    let (e_minus, e_plus) = split_excess(model, a)?;
    Ok((n as f64).powf(2.0 / 3.0) * (e_minus - e_plus))
}

/// Samples `h` on the uniform angle grid.
pub fn radial_graph_from_fn(radius: f64, grid: usize, h: impl Fn(f64) -> f64) -> CylinderSet {
    CylinderSet::RadialGraph {
        radius,
        h: (0..grid).map(|k| h(TAU * k as f64 / grid as f64)).collect(),
    }
}
