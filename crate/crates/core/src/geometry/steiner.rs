use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::body::ConvexBody;
use crate::error::{Error, Result};

/// Which part of the eps-parallel band around the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Outer,
    Inner,
    Both,
}

/// Local inner reach along the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerReach {
    Constant {
        value: f64,
    },
    /// Square of the given side; the boundary parameter is the arc-length
    /// position along the perimeter, starting at a corner.
    Square {
        side: f64,
    },
}

impl InnerReach {
    pub fn at(&self, param: f64) -> f64 {
        match *self {
            InnerReach::Constant { value } => value,
            InnerReach::Square { side } => {
                let x = param.rem_euclid(side);
                x.min(side - x).min(0.5 * side)
            }
        }
    }
}

/// Support-measure data of a convex body in the form used by the local
/// Steiner expansion of parallel-band volumes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinerData {
    pub dimension: usize,
    /// Total surface measure of the boundary.
    pub surface_measure: f64,
    /// Total masses of the lower support measures, ordered by decreasing
    /// index (`d-2, d-3, ..., 0`).
    pub lower_support_masses: Vec<f64>,
    pub inner_reach: InnerReach,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl SteinerData {
    /// Volume of the outer eps-band from the Steiner polynomial.
    pub fn outer_shell_volume(&self, eps: f64) -> f64 {
        let mut total = self.surface_measure * eps;
        for (idx, mass) in self.lower_support_masses.iter().enumerate() {
            let j = idx + 2;
            total += binomial(self.dimension - 1, j - 1) * mass * eps.powi(j as i32) / j as f64;
        }
        total
    }

    /// Coefficient of `eps^2` in the outer-shell expansion.
    pub fn quadratic_coefficient(&self) -> f64 {
        match self.lower_support_masses.first() {
            Some(m) => binomial(self.dimension - 1, 1) * m / 2.0,
            None => 0.0,
        }
    }
}

/// Closed-form volumes of parallel bands around intervals and discs.
pub fn parallel_set_volume(body: &ConvexBody, eps: f64, side: Side) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    let (outer, inner_fn): (f64, Box<dyn Fn() -> f64>) = match body {
        ConvexBody::Interval { .. } => (2.0 * eps, Box::new(move || 2.0 * eps)),
        ConvexBody::Ball { radius, .. } => {
            let r = *radius;
            (
                2.0 * PI * r * eps + PI * eps * eps,
                Box::new(move || 2.0 * PI * r * eps - PI * eps * eps),
            )
        }
        ConvexBody::Ellipsoid(_) => {
            return Err(Error::UnsupportedBody(
                "parallel volumes are closed-form only for intervals and discs".into(),
            ))
        }
    };
    let inradius = body.inradius();
    let inner = || {
        if eps >= inradius {
            Err(Error::EpsTooLarge { eps, inradius })
        } else {
            Ok(inner_fn())
        }
    };
    match side {
        Side::Outer => Ok(outer),
        Side::Inner => inner(),
        Side::Both => Ok(outer + inner()?),
    }
}

pub fn steiner_data(body: &ConvexBody) -> Result<SteinerData> {
    match body {
        ConvexBody::Interval { a, b } => Ok(SteinerData {
            dimension: 1,
            surface_measure: 2.0,
            lower_support_masses: vec![],
            inner_reach: InnerReach::Constant {
                value: 0.5 * (b - a),
            },
        }),
        ConvexBody::Ball { radius, .. } => Ok(SteinerData {
            dimension: 2,
            surface_measure: 2.0 * PI * radius,
            lower_support_masses: vec![2.0 * PI],
            inner_reach: InnerReach::Constant { value: *radius },
        }),
        ConvexBody::Ellipsoid(_) => Err(Error::UnsupportedBody(
            "support measures are implemented for intervals and discs only".into(),
        )),
    }
}

/// Axis-aligned square fixture with closed-form parallel volumes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub side: f64,
}

impl Square {
    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn parallel_set_volume(&self, eps: f64, side: Side) -> Result<f64> {
        let a = self.side;
        let outer = 4.0 * a * eps + PI * eps * eps;
        let inner = || {
            if eps >= 0.5 * a {
                Err(Error::EpsTooLarge {
                    eps,
                    inradius: 0.5 * a,
                })
            } else {
                Ok(4.0 * a * eps - 4.0 * eps * eps)
            }
        };
        match side {
            Side::Outer => Ok(outer),
            Side::Inner => inner(),
            Side::Both => Ok(outer + inner()?),
        }
    }

    pub fn steiner_data(&self) -> SteinerData {
        SteinerData {
            dimension: 2,
            surface_measure: 4.0 * self.side,
            lower_support_masses: vec![2.0 * PI],
            inner_reach: InnerReach::Square { side: self.side },
        }
    }
}
