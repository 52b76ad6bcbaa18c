//! Test densities with closed-form level-set oracles.
//!
//! Each model knows its level set `L = {f >= lambda}` exactly, together with
//! `p = P(L)`, `v = mu(L)`, `e = p - lambda v` and the normal derivative of the
//! density across the boundary. Probabilities of arbitrary bodies are computed
//! by adaptive quadrature, in polar coordinates for the planar models.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Point2};
use crate::quadrature::integrate;
use crate::rng::rng_from_seed;

pub const TOL_1D: f64 = 1e-10;
pub const TOL_2D: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// `f(x) = 1 - |x|` on `[-1, 1]`.
    Triangular1d,
    /// Standard normal.
    Normal1d,
    /// `f(x) = 3/4 (1 - x^2)` on `[-1, 1]`.
    Epanechnikov1d,
    /// `f(x) = 3/pi (1 - |x|)` on the unit disc.
    Cone2d,
    /// Standard bivariate normal.
    Gaussian2d,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Triangular1d,
        ModelKind::Normal1d,
        ModelKind::Epanechnikov1d,
        ModelKind::Cone2d,
        ModelKind::Gaussian2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Triangular1d => "triangular1d",
            ModelKind::Normal1d => "normal1d",
            ModelKind::Epanechnikov1d => "epanechnikov1d",
            ModelKind::Cone2d => "cone2d",
            ModelKind::Gaussian2d => "gaussian2d",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            ModelKind::Cone2d | ModelKind::Gaussian2d => 2,
            _ => 1,
        }
    }

    /// Supremum of the density.
    pub fn max_density(self) -> f64 {
        match self {
            ModelKind::Triangular1d => 1.0,
            ModelKind::Normal1d => 1.0 / TAU.sqrt(),
            ModelKind::Epanechnikov1d => 0.75,
            ModelKind::Cone2d => 3.0 / PI,
            ModelKind::Gaussian2d => 1.0 / TAU,
        }
    }

    /// Density as a function of `|x|` (all builtin models are symmetric).
    pub fn radial_pdf(self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            ModelKind::Triangular1d => (1.0 - r).max(0.0),
            ModelKind::Normal1d => (-0.5 * r * r).exp() / TAU.sqrt(),
            ModelKind::Epanechnikov1d => (0.75 * (1.0 - r * r)).max(0.0),
            ModelKind::Cone2d => (3.0 / PI * (1.0 - r)).max(0.0),
            ModelKind::Gaussian2d => (-0.5 * r * r).exp() / TAU,
        }
    }

    /// Radius of the support (`inf` for Gaussian models).
    fn support_radius(self) -> f64 {
        match self {
            ModelKind::Normal1d | ModelKind::Gaussian2d => f64::INFINITY,
            _ => 1.0,
        }
    }

    /// Non-smooth points of the 1D density.
    fn breakpoints(self) -> &'static [f64] {
        match self {
            ModelKind::Triangular1d => &[-1.0, 0.0, 1.0],
            ModelKind::Epanechnikov1d => &[-1.0, 1.0],
            _ => &[],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Exact description of the target level set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetOracle {
    pub lambda: f64,
    pub body: ConvexBody,
    pub p_lambda: f64,
    pub v_lambda: f64,
    pub e_lambda: f64,
    /// `|grad f|` on the boundary, from outside and from inside. The builtin
    /// models are symmetric so both are constant along the boundary.
    pub f_prime_plus: f64,
    pub f_prime_minus: f64,
}

/// Side of the boundary for one-sided derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    Plus,
    Minus,
}

/// Sample drawn from a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sample {
    Line(Vec<f64>),
    Plane(Vec<Point2>),
}

impl Sample {
    pub fn len(&self) -> usize {
        match self {
            Sample::Line(v) => v.len(),
            Sample::Plane(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of points inside `body`.
    pub fn count_in(&self, body: &ConvexBody) -> usize {
        match self {
            Sample::Line(v) => v.iter().filter(|x| body.contains(&[**x])).count(),
            Sample::Plane(v) => v.iter().filter(|p| body.contains2(**p)).count(),
        }
    }
}

/// A density together with its level-set oracle at a fixed level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    pub kind: ModelKind,
    pub oracle: LevelSetOracle,
}

/// Looks up a builtin model by name and builds its oracle at `lambda`.
pub fn builtin_model(name: &str, lambda: f64) -> Result<DensityModel> {
    DensityModel::new(name.parse()?, lambda)
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

impl DensityModel {
    pub fn new(kind: ModelKind, lambda: f64) -> Result<Self> {
        let max = kind.max_density();
        if !(lambda > 0.0 && lambda < max) {
            return Err(Error::LambdaOutOfRange {
                model: kind.name().into(),
                lambda,
                max,
            });
        }
        let oracle = match kind {
            ModelKind::Triangular1d => {
                let a = 1.0 - lambda;
                LevelSetOracle {
                    lambda,
                    body: ConvexBody::interval(-a, a)?,
                    p_lambda: 1.0 - lambda * lambda,
                    v_lambda: 2.0 * a,
                    e_lambda: a * a,
                    f_prime_plus: 1.0,
                    f_prime_minus: 1.0,
                }
            }
            ModelKind::Normal1d => {
                let a = (-2.0 * (lambda * TAU.sqrt()).ln()).sqrt();
                let p = 2.0 * std_normal_cdf(a) - 1.0;
                LevelSetOracle {
                    lambda,
                    body: ConvexBody::interval(-a, a)?,
                    p_lambda: p,
                    v_lambda: 2.0 * a,
                    e_lambda: p - 2.0 * a * lambda,
                    f_prime_plus: a * lambda,
                    f_prime_minus: a * lambda,
                }
            }
            ModelKind::Epanechnikov1d => {
                let a = (1.0 - 4.0 * lambda / 3.0).sqrt();
                let p = 1.5 * a - 0.5 * a * a * a;
                LevelSetOracle {
                    lambda,
                    body: ConvexBody::interval(-a, a)?,
                    p_lambda: p,
                    v_lambda: 2.0 * a,
                    e_lambda: p - 2.0 * a * lambda,
                    f_prime_plus: 1.5 * a,
                    f_prime_minus: 1.5 * a,
                }
            }
            ModelKind::Cone2d => {
                let r = 1.0 - PI * lambda / 3.0;
                let p = 3.0 * r * r - 2.0 * r * r * r;
                let v = PI * r * r;
                LevelSetOracle {
                    lambda,
                    body: ConvexBody::ball([0.0, 0.0], r)?,
                    p_lambda: p,
                    v_lambda: v,
                    e_lambda: p - lambda * v,
                    f_prime_plus: 3.0 / PI,
                    f_prime_minus: 3.0 / PI,
                }
            }
            ModelKind::Gaussian2d => {
                let r = (-2.0 * (TAU * lambda).ln()).sqrt();
                let p = 1.0 - TAU * lambda;
                let v = PI * r * r;
                LevelSetOracle {
                    lambda,
                    body: ConvexBody::ball([0.0, 0.0], r)?,
                    p_lambda: p,
                    v_lambda: v,
                    e_lambda: p - lambda * v,
                    f_prime_plus: r * lambda,
                    f_prime_minus: r * lambda,
                }
            }
        };
        Ok(DensityModel { kind, oracle })
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dimension(&self) -> usize {
        self.kind.dimension()
    }

    pub fn lambda(&self) -> f64 {
        self.oracle.lambda
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        match x {
            [v] => self.kind.radial_pdf(*v),
            [a, b] => self.kind.radial_pdf(a.hypot(*b)),
            _ => panic!("pdf: unsupported dimension {}", x.len()),
        }
    }

    /// `|grad f|` on the indicated side of the boundary. The parameter is the
    /// endpoint index (0 left, 1 right) in 1D and the angle in 2D.
    pub fn boundary_derivative(&self, side: BoundarySide, _boundary_param: f64) -> f64 {
        match side {
            BoundarySide::Plus => self.oracle.f_prime_plus,
            BoundarySide::Minus => self.oracle.f_prime_minus,
        }
    }

    /// `n` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Sample {
        let mut rng = rng_from_seed(seed);
        match self.kind {
            ModelKind::Triangular1d => Sample::Line(
                (0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        if u < 0.5 {
                            (2.0 * u).sqrt() - 1.0
                        } else {
                            1.0 - (2.0 * (1.0 - u)).sqrt()
                        }
                    })
                    .collect(),
            ),
            ModelKind::Normal1d => {
                Sample::Line((0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            }
            ModelKind::Epanechnikov1d => Sample::Line(
                (0..n)
                    .map(|_| {
                        // Inverse of F(x) = 1/2 + 3x/4 - x^3/4.
                        let u: f64 = rng.random();
                        2.0 * ((2.0 * u - 1.0).asin() / 3.0).sin()
                    })
                    .collect(),
            ),
            ModelKind::Cone2d => {
                // Radius has density 6 r (1 - r), i.e. Beta(2, 2).
                let beta = Beta::new(2.0, 2.0).expect("valid beta parameters");
                Sample::Plane(
                    (0..n)
                        .map(|_| {
                            let r = beta.sample(&mut rng);
                            let t = TAU * rng.random::<f64>();
                            [r * t.cos(), r * t.sin()]
                        })
                        .collect(),
                )
            }
            ModelKind::Gaussian2d => Sample::Plane(
                (0..n)
                    .map(|_| {
                        [
                            StandardNormal.sample(&mut rng),
                            StandardNormal.sample(&mut rng),
                        ]
                    })
                    .collect(),
            ),
        }
    }

    /// Exact CDF for the 1D models.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Triangular1d => {
                if x <= -1.0 {
                    0.0
                } else if x <= 0.0 {
                    0.5 * (1.0 + x) * (1.0 + x)
                } else if x < 1.0 {
                    1.0 - 0.5 * (1.0 - x) * (1.0 - x)
                } else {
                    1.0
                }
            }
            ModelKind::Normal1d => std_normal_cdf(x),
            ModelKind::Epanechnikov1d => {
                let x = x.clamp(-1.0, 1.0);
                0.5 + 0.75 * x - 0.25 * x * x * x
            }
            _ => panic!("cdf is defined for 1D models only"),
        }
    }

    /// `P([a, b])` by quadrature.
    pub fn interval_probability(&self, a: f64, b: f64) -> Result<f64> {
        let rs = self.kind.support_radius();
        let (lo, hi) = (a.max(-rs), b.min(rs));
        if hi <= lo {
            return Ok(0.0);
        }
        let kind = self.kind;
        integrate(
            |x| kind.radial_pdf(x),
            lo,
            hi,
            kind.breakpoints(),
            0.1 * TOL_1D,
        )
    }

    /// `P(A)` by quadrature.
    pub fn probability(&self, body: &ConvexBody) -> Result<f64> {
        self.check_dim(body)?;
        match body {
            ConvexBody::Interval { a, b } => self.interval_probability(*a, *b),
            _ => {
                let body = body.clone();
                self.polar_integral(
                    |_| 1.0,
                    move |dir| {
                        clip_ray(body.line_interval([0.0, 0.0], dir))
                            .into_iter()
                            .collect()
                    },
                )
            }
        }
    }

    /// `e_lambda(A) = P(A) - lambda mu(A)`.
    pub fn excess_mass_of(&self, body: &ConvexBody) -> Result<f64> {
        Ok(self.probability(body)? - self.lambda() * body.volume())
    }

    /// Integral of `weight(r) * f` over the planar region given ray by ray
    /// from the origin: `segments(direction)` lists radial intervals.
    pub(crate) fn polar_integral<W, S>(&self, weight: W, segments: S) -> Result<f64>
    where
        W: Fn(f64) -> f64,
        S: Fn(Point2) -> Vec<(f64, f64)>,
    {
        let kind = self.kind;
        let rs = kind.support_radius();
        let mut inner_err = None;
        let outer = integrate(
            |t| {
                let dir = [t.cos(), t.sin()];
                let mut total = 0.0;
                for (lo, hi) in segments(dir) {
                    let hi = hi.min(rs);
                    if hi <= lo {
                        continue;
                    }
                    let bps: &[f64] = if rs.is_finite() { &[1.0] } else { &[] };
                    match integrate(
                        |r| weight(r) * kind.radial_pdf(r) * r,
                        lo,
                        hi,
                        bps,
                        0.01 * TOL_2D,
                    ) {
                        Ok(v) => total += v,
                        Err(e) => inner_err = Some(e),
                    }
                }
                total
            },
            0.0,
            TAU,
            &[],
            TOL_2D,
        )?;
        match inner_err {
            Some(e) => Err(e),
            None => Ok(outer),
        }
    }

    fn check_dim(&self, body: &ConvexBody) -> Result<()> {
        if body.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: body.dimension(),
            });
        }
        Ok(())
    }

    /// `(P(A \ L), P(L \ A), mu(A \ L), mu(L \ A))` for a body `A`.
    pub fn split_sym_diff(&self, body: &ConvexBody) -> Result<SymDiffParts> {
        self.check_dim(body)?;
        let l = &self.oracle.body;
        match (body, l) {
            (ConvexBody::Interval { a, b }, ConvexBody::Interval { a: la, b: lb }) => {
                let mut out = SymDiffParts::default();
                // A \ L
                for (lo, hi) in [(*a, b.min(*la)), (a.max(*lb), *b)] {
                    if hi > lo {
                        out.p_outside += self.interval_probability(lo, hi)?;
                        out.mu_outside += hi - lo;
                    }
                }
                // L \ A, with A possibly disjoint from L.
                let pieces = if b < la || a > lb {
                    vec![(*la, *lb)]
                } else {
                    vec![(*la, a.min(*lb)), (b.max(*la), *lb)]
                };
                for (lo, hi) in pieces {
                    if hi > lo {
                        out.p_inside += self.interval_probability(lo, hi)?;
                        out.mu_inside += hi - lo;
                    }
                }
                Ok(out)
            }
            (_, ConvexBody::Ball { center, radius }) if *center == [0.0, 0.0] => {
                let r_l = *radius;
                let seg_out = {
                    let body = body.clone();
                    move |dir: Point2| -> Vec<(f64, f64)> {
                        match clip_ray(body.line_interval([0.0, 0.0], dir)) {
                            Some((lo, hi)) if hi > r_l => vec![(lo.max(r_l), hi)],
                            _ => vec![],
                        }
                    }
                };
                let seg_in = {
                    let body = body.clone();
                    move |dir: Point2| -> Vec<(f64, f64)> {
                        match clip_ray(body.line_interval([0.0, 0.0], dir)) {
                            None => vec![(0.0, r_l)],
                            Some((lo, hi)) => {
                                let mut v = Vec::new();
                                if lo > 0.0 {
                                    v.push((0.0, lo.min(r_l)));
                                }
                                if hi < r_l {
                                    v.push((hi.max(0.0), r_l));
                                }
                                v
                            }
                        }
                    }
                };
                let area = |segs: &dyn Fn(Point2) -> Vec<(f64, f64)>| {
                    let inner = |t: f64| {
                        segs([t.cos(), t.sin()])
                            .into_iter()
                            .map(|(lo, hi)| 0.5 * (hi * hi - lo * lo))
                            .sum::<f64>()
                    };
                    integrate(inner, 0.0, TAU, &[], 1e-10)
                };
                Ok(SymDiffParts {
                    p_outside: self.polar_integral(|_| 1.0, &seg_out)?,
                    p_inside: self.polar_integral(|_| 1.0, &seg_in)?,
                    mu_outside: area(&seg_out)?,
                    mu_inside: area(&seg_in)?,
                })
            }
            _ => Err(Error::UnsupportedBody(
                "symmetric-difference split needs an interval or origin-centred disc level set"
                    .into(),
            )),
        }
    }

    /// `P(A △ L)`.
    pub fn p_sym_diff(&self, body: &ConvexBody) -> Result<f64> {
        let parts = self.split_sym_diff(body)?;
        Ok(parts.p_outside + parts.p_inside)
    }

    /// Diagnostic certificate of global identifiability: the minimum excess
    /// risk `e_lambda - e_lambda(A)` over a grid of perturbed class members at
    /// Hausdorff distance at least `delta`.
    pub fn identifiability_margin(&self, delta: f64) -> Result<f64> {
        let l = &self.oracle.body;
        let e = self.oracle.e_lambda;
        let mut worst = f64::INFINITY;
        let steps: Vec<f64> = (-6..=6).map(|k| k as f64 * 0.05).collect();
        match l {
            ConvexBody::Interval { a, b } => {
                for &da in &steps {
                    for &db in &steps {
                        let (na, nb) = (a + da, b + db);
                        if nb < na || da.abs().max(db.abs()) < delta {
                            continue;
                        }
                        let cand = ConvexBody::interval(na, nb)?;
                        worst = worst.min(e - self.excess_mass_of(&cand)?);
                    }
                }
            }
            ConvexBody::Ball { center, radius } => {
                for &dx in &steps {
                    for &dr in &steps {
                        let r = radius + dr;
                        if r <= 0.0 || dx.abs() + dr.abs() < delta {
                            continue;
                        }
                        let cand = ConvexBody::ball([center[0] + dx, center[1]], r)?;
                        worst = worst.min(e - self.excess_mass_of(&cand)?);
                    }
                }
            }
            ConvexBody::Ellipsoid(_) => unreachable!("builtin level sets are intervals or discs"),
        }
        Ok(worst)
    }
}

/// Masses of the outer (`A \ L`) and inner (`L \ A`) parts of `A △ L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymDiffParts {
    pub p_outside: f64,
    pub p_inside: f64,
    pub mu_outside: f64,
    pub mu_inside: f64,
}

fn clip_ray(iv: Option<(f64, f64)>) -> Option<(f64, f64)> {
    iv.and_then(|(lo, hi)| {
        if hi <= 0.0 {
            None
        } else {
            Some((lo.max(0.0), hi))
        }
    })
}
