use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::body::{ConvexBody, Point2};
use super::projection::signed_distance;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub const DEFAULT_HAUSDORFF_GRID: usize = 2048;

/// Hausdorff distance, with the boundary grid used when it is approximate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffEstimate {
    pub value: f64,
    /// `None` when the value is exact.
    pub grid_points: Option<usize>,
}

fn check_dims(a: &ConvexBody, b: &ConvexBody) -> Result<()> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    Ok(())
}

pub fn hausdorff_distance(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    hausdorff_distance_with(a, b, DEFAULT_HAUSDORFF_GRID).map(|h| h.value)
}

pub fn hausdorff_distance_with(
    a: &ConvexBody,
    b: &ConvexBody,
    grid: usize,
) -> Result<HausdorffEstimate> {
    check_dims(a, b)?;
    match (a, b) {
        (ConvexBody::Interval { a: a0, b: b0 }, ConvexBody::Interval { a: a1, b: b1 }) => {
            Ok(HausdorffEstimate {
                value: (a0 - a1).abs().max((b0 - b1).abs()),
                grid_points: None,
            })
        }
        (
            ConvexBody::Ball {
                center: c0,
                radius: r0,
            },
            ConvexBody::Ball {
                center: c1,
                radius: r1,
            },
        ) => Ok(HausdorffEstimate {
            value: (c0[0] - c1[0]).hypot(c0[1] - c1[1]) + (r0 - r1).abs(),
            grid_points: None,
        }),
        _ => {
            if a == b {
                return Ok(HausdorffEstimate {
                    value: 0.0,
                    grid_points: None,
                });
            }
            let grid = grid.max(8);
            let one_sided = |from: &ConvexBody, to: &ConvexBody| -> Result<f64> {
                let mut worst = 0.0f64;
                for k in 0..grid {
                    let p = from.boundary_point(k as f64 / grid as f64 * TAU);
                    worst = worst.max(signed_distance(to, &p)?.max(0.0));
                }
                Ok(worst)
            };
            Ok(HausdorffEstimate {
                value: one_sided(a, b)?.max(one_sided(b, a)?),
                grid_points: Some(grid),
            })
        }
    }
}

/// Quasi-Monte Carlo settings for planar symmetric-difference areas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmcConfig {
    pub seed: u64,
    /// Number of independent Cranley–Patterson shifts used for the error estimate.
    pub shifts: usize,
    pub initial_points: usize,
    pub max_points: usize,
    /// Target standard error relative to the estimate.
    pub target_rel_se: f64,
}

impl Default for QmcConfig {
    fn default() -> Self {
        QmcConfig {
            seed: 0x51D_D1FF,
            shifts: 16,
            initial_points: 4096,
            max_points: 1 << 18,
            target_rel_se: 1e-3,
        }
    }
}

/// Area or length estimate with its standard error (zero when exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Intersection area of two discs.
pub fn disc_intersection_area(c0: Point2, r0: f64, c1: Point2, r1: f64) -> f64 {
    let d = (c0[0] - c1[0]).hypot(c0[1] - c1[1]);
    if d >= r0 + r1 {
        return 0.0;
    }
    if d <= (r0 - r1).abs() {
        let r = r0.min(r1);
        return PI * r * r;
    }
    let a0 = ((d * d + r0 * r0 - r1 * r1) / (2.0 * d * r0))
        .clamp(-1.0, 1.0)
        .acos();
    let a1 = ((d * d + r1 * r1 - r0 * r0) / (2.0 * d * r1))
        .clamp(-1.0, 1.0)
        .acos();
    let k = ((-d + r0 + r1) * (d + r0 - r1) * (d - r0 + r1) * (d + r0 + r1)).max(0.0);
    r0 * r0 * a0 + r1 * r1 * a1 - 0.5 * k.sqrt()
}

pub fn sym_diff_volume(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    sym_diff_volume_with(a, b, &QmcConfig::default()).map(|v| v.value)
}

/// `mu(A △ B)`: exact for interval and disc pairs, randomized QMC otherwise.
pub fn sym_diff_volume_with(
    a: &ConvexBody,
    b: &ConvexBody,
    qmc: &QmcConfig,
) -> Result<VolumeEstimate> {
    check_dims(a, b)?;
    let exact = |value: f64| {
        Ok(VolumeEstimate {
            value: value.max(0.0),
            std_error: 0.0,
        })
    };
    match (a, b) {
        (ConvexBody::Interval { a: a0, b: b0 }, ConvexBody::Interval { a: a1, b: b1 }) => {
            let overlap = (b0.min(*b1) - a0.max(*a1)).max(0.0);
            exact((b0 - a0) + (b1 - a1) - 2.0 * overlap)
        }
        (
            ConvexBody::Ball {
                center: c0,
                radius: r0,
            },
            ConvexBody::Ball {
                center: c1,
                radius: r1,
            },
        ) => {
            if c0 == c1 {
                return exact(PI * (r0 * r0 - r1 * r1).abs());
            }
            let inter = disc_intersection_area(*c0, *r0, *c1, *r1);
            exact(PI * (r0 * r0 + r1 * r1) - 2.0 * inter)
        }
        _ if a == b => exact(0.0),
        _ => Ok(qmc_sym_diff(a, b, qmc)),
    }
}

fn qmc_sym_diff(a: &ConvexBody, b: &ConvexBody, qmc: &QmcConfig) -> VolumeEstimate {
    let ba = a.bounding_box();
    let bb = b.bounding_box();
    let bx = [
        ba[0].min(bb[0]),
        ba[1].max(bb[1]),
        ba[2].min(bb[2]),
        ba[3].max(bb[3]),
    ];
    let (w, h) = (bx[1] - bx[0], bx[3] - bx[2]);
    let box_area = w * h;
    let mut rng = rng_from_seed(qmc.seed);
    let shifts: Vec<[f64; 2]> = (0..qmc.shifts.max(2))
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    let mut hits = vec![0u64; shifts.len()];
    let mut done = 0usize;
    let mut target = qmc.initial_points.max(16);
    loop {
        for i in done..target {
            let base = [
                radical_inverse(i as u64 + 1, 2),
                radical_inverse(i as u64 + 1, 3),
            ];
            for (s, shift) in shifts.iter().enumerate() {
                let u = [(base[0] + shift[0]).fract(), (base[1] + shift[1]).fract()];
                let p = [bx[0] + u[0] * w, bx[2] + u[1] * h];
                if a.contains2(p) != b.contains2(p) {
                    hits[s] += 1;
                }
            }
        }
        done = target;
        let est: Vec<f64> = hits
            .iter()
            .map(|&k| box_area * k as f64 / done as f64)
            .collect();
        let m = est.len() as f64;
        let mean = est.iter().sum::<f64>() / m;
        let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let se = (var / m).sqrt();
        if se <= qmc.target_rel_se * mean || done >= qmc.max_points {
            return VolumeEstimate {
                value: mean,
                std_error: se,
            };
        }
        target = (2 * done).min(qmc.max_points);
    }
}
