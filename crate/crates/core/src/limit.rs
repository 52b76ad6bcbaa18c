//! Simulation of the limiting argmax sets `Z = argmax sqrt(lambda) W(B) - D(B)`.
//!
//! In 1D the cylinder is two real lines, one per endpoint, and `W` restricted
//! to shifts is a pair of independent two-sided Brownian motions. Each half
//! line draws its increments from its own random stream, so a path generated
//! with a larger truncation extends the shorter one exactly.
//!
//! In 2D the noise is a white-noise field on a `(theta, s)` cell grid and the
//! argmax runs over disc perturbations `h = dr + dx cos + dy sin`.

use std::f64::consts::TAU;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::{CylinderSet, DriftSpec};
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// Values within this distance of the maximum count as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerGrid {
    pub step: f64,
    pub c_max: f64,
}

impl Default for WienerGrid {
    fn default() -> Self {
        WienerGrid {
            step: 0.01,
            c_max: 8.0,
        }
    }
}

impl WienerGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.c_max > 0.0 && self.c_max >= 4.0 * self.step) {
            return Err(Error::InvalidParameter(format!(
                "wiener grid needs step > 0 and c_max >= 4 step (step {}, c_max {})",
                self.step, self.c_max
            )));
        }
        Ok(())
    }

    /// Grid points per half line.
    pub fn steps(&self) -> usize {
        (self.c_max / self.step).round() as usize
    }
}

/// Brownian motion on `[-K h, K h]` with `W(0) = 0`, stored as the values at
/// the grid points of each half line.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSidedPath {
    pub step: f64,
    /// `plus[k] = W(k h)`.
    pub plus: Vec<f64>,
    /// `minus[k] = W(-k h)`.
    pub minus: Vec<f64>,
    /// Boundary mass carried by the path; increments have variance
    /// `step * mass`.
    pub mass: f64,
}

fn cumulative(rng: &mut Rng, steps: usize, sd: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, sd).expect("positive standard deviation");
    let mut out = Vec::with_capacity(steps + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for _ in 0..steps {
        acc += normal.sample(rng);
        out.push(acc);
    }
    out
}

impl TwoSidedPath {
    pub fn generate(step: f64, steps: usize, mass: f64, seed_plus: u64, seed_minus: u64) -> Self {
        let sd = (step * mass).sqrt();
        TwoSidedPath {
            step,
            plus: cumulative(&mut rng_from_seed(seed_plus), steps, sd),
            minus: cumulative(&mut rng_from_seed(seed_minus), steps, sd),
            mass,
        }
    }

    /// Grid points per half line.
    pub fn steps(&self) -> usize {
        self.plus.len() - 1
    }

    /// `W(k h)` for `-K <= k <= K`.
    pub fn at(&self, k: i64) -> f64 {
        if k >= 0 {
            self.plus[k as usize]
        } else {
            self.minus[(-k) as usize]
        }
    }

    /// The same path on a grid of half the step, filled in by Brownian-bridge
    /// midpoints.
    pub fn refine(&self, seed: u64) -> TwoSidedPath {
        let mut rng = rng_from_seed(seed);
        let sd = (0.25 * self.step * self.mass).sqrt();
        let normal = Normal::new(0.0, sd).expect("positive standard deviation");
        let mut half = |v: &[f64]| {
            let mut out = Vec::with_capacity(2 * v.len() - 1);
            out.push(v[0]);
            for w in v.windows(2) {
                out.push(0.5 * (w[0] + w[1]) + normal.sample(&mut rng));
                out.push(w[1]);
            }
            out
        };
        let plus = half(&self.plus);
        let minus = half(&self.minus);
        TwoSidedPath {
            step: 0.5 * self.step,
            plus,
            minus,
            mass: self.mass,
        }
    }
}

/// Per-endpoint paths for the 1D cylinder.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalPaths {
    pub left: TwoSidedPath,
    pub right: TwoSidedPath,
}

/// Result of a 1D grid argmax.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridArgmax {
    pub k_left: i64,
    pub k_right: i64,
    pub value: f64,
    pub ties: usize,
}

fn half_slope(drift: &DriftSpec, param: f64, k: i64) -> f64 {
    drift.slope(param, k as f64)
}

impl IntervalPaths {
    pub fn generate(grid: &WienerGrid, seed: u64) -> Self {
        let steps = grid.steps();
        let path = |e: u64| {
            TwoSidedPath::generate(
                grid.step,
                steps,
                1.0,
                derive_seed(seed, &[e, 0]),
                derive_seed(seed, &[e, 1]),
            )
        };
        IntervalPaths {
            left: path(0),
            right: path(1),
        }
    }

    pub fn refine(&self, seed: u64) -> Self {
        IntervalPaths {
            left: self.left.refine(derive_seed(seed, &[0])),
            right: self.right.refine(derive_seed(seed, &[1])),
        }
    }

    pub fn step(&self) -> f64 {
        self.left.step
    }

    pub fn steps(&self) -> usize {
        self.left.steps()
    }

    /// `W(B)` for shifts on the grid, `B = IntervalShifts{k_left h, k_right h}`.
    pub fn w(&self, k_left: i64, k_right: i64) -> f64 {
        self.left.at(k_left) + self.right.at(k_right)
    }

    fn argmax_1d(&self, value: impl Fn(i64) -> f64) -> (i64, f64, usize) {
        let big_k = self.steps() as i64;
        let mut best = (0i64, value(0));
        for k in -big_k..=big_k {
            let v = value(k);
            if v > best.1 {
                best = (k, v);
            }
        }
        let ties = (-big_k..=big_k)
            .filter(|&k| k != best.0 && (value(k) - best.1).abs() <= TIE_TOL)
            .count();
        (best.0, best.1, ties)
    }

    /// Argmax of `scale (sqrt(lambda) W(B) - D(B))` over all grid shifts; the
    /// problem separates into one maximization per endpoint.
    pub fn unconstrained_argmax(&self, drift: &DriftSpec, lambda: f64, scale: f64) -> GridArgmax {
        let h = self.step();
        let sl = lambda.sqrt();
        let side = |path: &TwoSidedPath, param: f64| {
            self.argmax_1d(|k| {
                let t = k as f64 * h;
                scale * (sl * path.at(k) - 0.5 * half_slope(drift, param, k) * t * t)
            })
        };
        let (kl, vl, tl) = side(&self.left, 0.0);
        let (kr, vr, tr) = side(&self.right, 1.0);
        GridArgmax {
            k_left: kl,
            k_right: kr,
            value: vl + vr,
            ties: tl + tr,
        }
    }

    /// Argmax over shifts with equal outer and inner mass, `t_left = -t_right`.
    pub fn constrained_argmax(&self, drift: &DriftSpec, lambda: f64, scale: f64) -> GridArgmax {
        let h = self.step();
        let sl = lambda.sqrt();
        let (k, v, ties) = self.argmax_1d(|k| {
            let t = k as f64 * h;
            let g = half_slope(drift, 0.0, k) + half_slope(drift, 1.0, -k);
            scale * (sl * self.w(k, -k) - 0.5 * g * t * t)
        });
        GridArgmax {
            k_left: k,
            k_right: -k,
            value: v,
            ties,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub m_total: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    /// `(t_left, t_right)` in 1D, `(dx, dy, dr)` in 2D.
    pub shifts: Vec<f64>,
}

/// One realization of the limiting argmax set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitDraw {
    pub argmax_set: CylinderSet,
    pub objective: f64,
    pub constrained: bool,
    pub functionals: Functionals,
    /// Other grid points within [`TIE_TOL`] of the maximum.
    pub ties: usize,
}

fn interval_draw(paths: &IntervalPaths, best: GridArgmax, constrained: bool) -> Result<LimitDraw> {
    let big_k = paths.steps() as i64;
    if best.k_left.abs() >= big_k - 2 || best.k_right.abs() >= big_k - 2 {
        return Err(Error::TruncationHit { index: 0 });
    }
    let h = paths.step();
    let set = CylinderSet::IntervalShifts {
        t_left: best.k_left as f64 * h,
        t_right: best.k_right as f64 * h,
    };
    Ok(LimitDraw {
        functionals: Functionals {
            m_total: set.m_plus() + set.m_minus(),
            m_plus: set.m_plus(),
            m_minus: set.m_minus(),
            shifts: vec![best.k_left as f64 * h, best.k_right as f64 * h],
        },
        argmax_set: set,
        objective: best.value,
        constrained,
        ties: best.ties,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// Draw of `Z(B)` over all interval shifts.
pub fn draw_z_interval(
    drift: &DriftSpec,
    lambda: f64,
    grid: &WienerGrid,
    seed: u64,
) -> Result<LimitDraw> {
    check_lambda(lambda)?;
    grid.validate()?;
    let paths = IntervalPaths::generate(grid, seed);
    interval_draw(
        &paths,
        paths.unconstrained_argmax(drift, lambda, 1.0),
        false,
    )
}

/// Draw of `Z(B*)`: shifts with equal outer and inner mass.
pub fn draw_z_interval_constrained(
    drift: &DriftSpec,
    lambda: f64,
    grid: &WienerGrid,
    seed: u64,
) -> Result<LimitDraw> {
    check_lambda(lambda)?;
    grid.validate()?;
    let paths = IntervalPaths::generate(grid, seed);
    interval_draw(&paths, paths.constrained_argmax(drift, lambda, 1.0), true)
}

/// Same as [`draw_z_interval`] (or its constrained version) on the path
/// refined `levels` times by Brownian-bridge midpoints.
pub fn draw_z_interval_refined(
    drift: &DriftSpec,
    lambda: f64,
    grid: &WienerGrid,
    seed: u64,
    levels: usize,
    constrained: bool,
) -> Result<LimitDraw> {
    check_lambda(lambda)?;
    grid.validate()?;
    let mut paths = IntervalPaths::generate(grid, seed);
    for level in 0..levels {
        paths = paths.refine(derive_seed(seed, &[u64::MAX, level as u64]));
    }
    let best = if constrained {
        paths.constrained_argmax(drift, lambda, 1.0)
    } else {
        paths.unconstrained_argmax(drift, lambda, 1.0)
    };
    interval_draw(&paths, best, constrained)
}

/// Grid for the planar disc-perturbation limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallGrid {
    pub angles: usize,
    pub ds: f64,
    pub c_max: f64,
    /// Radius of the level-set disc; sets the boundary measure.
    pub radius: f64,
    /// Lattice points per parameter for the coarse search.
    pub lattice: usize,
    /// The coarse lattice spans `[-span, span]` in each parameter.
    pub span: f64,
}

impl Default for BallGrid {
    fn default() -> Self {
        BallGrid {
            angles: 256,
            ds: 0.02,
            c_max: 6.0,
            radius: 1.0,
            lattice: 41,
            span: 3.0,
        }
    }
}

impl BallGrid {
    pub fn validate(&self) -> Result<()> {
        if self.angles < 3
            || !(self.ds > 0.0 && self.c_max > 2.0 * self.ds && self.radius > 0.0)
            || self.lattice < 3
            || self.lattice.is_multiple_of(2)
            || !(self.span > 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "invalid ball grid {self:?}"
            )));
        }
        Ok(())
    }

    fn rows(&self) -> usize {
        (self.c_max / self.ds).round() as usize
    }

    /// `M`-mass of one noise cell.
    pub fn cell_mass(&self) -> f64 {
        self.radius * TAU / self.angles as f64 * self.ds
    }
}

/// White noise on the `(theta, s)` grid, stored as per-column running sums
/// outward (`plus`) and inward (`minus`) from `s = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseField {
    pub grid: BallGrid,
    rows: usize,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl NoiseField {
    pub fn generate(grid: &BallGrid, seed: u64) -> Self {
        let rows = grid.rows();
        let sd = grid.cell_mass().sqrt();
        let mut plus = Vec::with_capacity(grid.angles * (rows + 1));
        let mut minus = Vec::with_capacity(grid.angles * (rows + 1));
        let mut rng = rng_from_seed(seed);
        let normal = Normal::new(0.0, sd).expect("positive standard deviation");
        for _ in 0..grid.angles {
            for side in [&mut plus, &mut minus] {
                let mut acc = 0.0;
                side.push(0.0);
                for _ in 0..rows {
                    acc += normal.sample(&mut rng);
                    side.push(acc);
                }
            }
        }
        NoiseField {
            grid: *grid,
            rows,
            plus,
            minus,
        }
    }

    /// Noise mass between `0` and `h` in column `k`, linear within a cell.
    pub fn column(&self, k: usize, h: f64) -> f64 {
        let sums = if h >= 0.0 { &self.plus } else { &self.minus };
        let base = k * (self.rows + 1);
        let x = (h.abs() / self.grid.ds).min(self.rows as f64);
        let m = x.floor() as usize;
        if m >= self.rows {
            return sums[base + self.rows];
        }
        let frac = x - m as f64;
        sums[base + m] + frac * (sums[base + m + 1] - sums[base + m])
    }

    /// `W(B)` for a radial graph on the field's angle grid.
    pub fn w(&self, h: &[f64]) -> f64 {
        h.iter().enumerate().map(|(k, v)| self.column(k, *v)).sum()
    }
}

struct BallObjective<'a> {
    field: &'a NoiseField,
    cos: Vec<f64>,
    sin: Vec<f64>,
    f_plus: Vec<f64>,
    f_minus: Vec<f64>,
    sqrt_lambda: f64,
    weight: f64,
}

impl<'a> BallObjective<'a> {
    fn new(field: &'a NoiseField, drift: &DriftSpec, lambda: f64) -> Self {
        let g = field.grid.angles;
        let thetas: Vec<f64> = (0..g).map(|k| TAU * k as f64 / g as f64).collect();
        BallObjective {
            field,
            cos: thetas.iter().map(|t| t.cos()).collect(),
            sin: thetas.iter().map(|t| t.sin()).collect(),
            f_plus: thetas.iter().map(|t| (drift.f_plus)(*t)).collect(),
            f_minus: thetas.iter().map(|t| (drift.f_minus)(*t)).collect(),
            sqrt_lambda: lambda.sqrt(),
            weight: field.grid.radius * TAU / g as f64,
        }
    }

    fn h(&self, p: [f64; 3]) -> Vec<f64> {
        let [dx, dy, dr] = p;
        (0..self.cos.len())
            .map(|k| dr + dx * self.cos[k] + dy * self.sin[k])
            .collect()
    }

    /// `sqrt(lambda) W(B) - D(B)`, or `-inf` outside the truncated grid.
    fn value(&self, p: [f64; 3]) -> f64 {
        let c = self.field.grid.c_max;
        let mut w = 0.0;
        let mut d = 0.0;
        for k in 0..self.cos.len() {
            let h = p[2] + p[0] * self.cos[k] + p[1] * self.sin[k];
            if h.abs() > c {
                return f64::NEG_INFINITY;
            }
            w += self.field.column(k, h);
            let g = if h > 0.0 {
                self.f_plus[k]
            } else {
                self.f_minus[k]
            };
            d += 0.5 * g * h * h;
        }
        self.sqrt_lambda * w - self.weight * d
    }
}

/// Draw of the argmax over disc perturbations `dr + dx cos + dy sin`; the
/// constrained version fixes `dr = 0`, which balances outer and inner mass.
pub fn draw_z_ball2d(
    drift: &DriftSpec,
    lambda: f64,
    grid: &BallGrid,
    seed: u64,
    constrained: bool,
) -> Result<LimitDraw> {
    check_lambda(lambda)?;
    grid.validate()?;
    let field = NoiseField::generate(grid, seed);
    let obj = BallObjective::new(&field, drift, lambda);

    let l = grid.lattice;
    let coord = |i: usize| grid.span * (2.0 * i as f64 / (l - 1) as f64 - 1.0);
    let spacing = 2.0 * grid.span / (l - 1) as f64;
    let r_range: Vec<usize> = if constrained {
        vec![(l - 1) / 2]
    } else {
        (0..l).collect()
    };

    let mut best = ([0.0; 3], obj.value([0.0; 3]));
    let mut ties = 0;
    for i in 0..l {
        for j in 0..l {
            for &m in &r_range {
                let p = [coord(i), coord(j), coord(m)];
                let v = obj.value(p);
                if v > best.1 {
                    best = (p, v);
                    ties = 0;
                } else if (v - best.1).abs() <= TIE_TOL && p != best.0 {
                    ties += 1;
                }
            }
        }
    }

    let opts = SimplexOptions {
        tol: 1e-8,
        max_iter: 1000,
    };
    let refined = if constrained {
        let r = nelder_mead(
            |x| -obj.value([x[0], x[1], 0.0]),
            &best.0[..2],
            &[0.5 * spacing, 0.5 * spacing],
            opts,
        );
        ([r.x[0], r.x[1], 0.0], -r.value)
    } else {
        let r = nelder_mead(
            |x| -obj.value([x[0], x[1], x[2]]),
            &best.0,
            &[0.5 * spacing; 3],
            opts,
        );
        ([r.x[0], r.x[1], r.x[2]], -r.value)
    };
    if refined.1 > best.1 {
        let moved = (0..3)
            .map(|i| (refined.0[i] - best.0[i]).abs() / spacing)
            .fold(0.0, f64::max);
        if moved > 2.0 {
            return Err(Error::GridTooCoarse { cells: moved });
        }
        best = refined;
    }

    let h = obj.h(best.0);
    if h.iter().any(|v| v.abs() > grid.c_max - 2.0 * grid.ds) {
        return Err(Error::TruncationHit { index: 0 });
    }
    let set = CylinderSet::RadialGraph {
        radius: grid.radius,
        h,
    };
    Ok(LimitDraw {
        functionals: Functionals {
            m_total: set.m_plus() + set.m_minus(),
            m_plus: set.m_plus(),
            m_minus: set.m_minus(),
            shifts: best.0.to_vec(),
        },
        argmax_set: set,
        objective: best.1,
        constrained,
        ties,
    })
}

/// Empirical distribution of limit-draw functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZDistribution {
    /// Draws in index order.
    pub draws: Vec<LimitDraw>,
    /// Sorted `M(Z)` values.
    pub m_total: Vec<f64>,
    /// Sorted objective values.
    pub objective: Vec<f64>,
    /// Sorted values of each shift coordinate.
    pub shifts: Vec<Vec<f64>>,
}

impl ZDistribution {
    /// Fraction of draws with a tied maximum.
    pub fn tie_fraction(&self) -> f64 {
        self.draws.iter().filter(|d| d.ties > 0).count() as f64 / self.draws.len() as f64
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Runs `n_draws` draws with seeds derived from `(seed, index)` in parallel;
/// the result does not depend on the number of worker threads.
pub fn z_distribution<F>(draw: F, n_draws: usize, seed: u64) -> Result<ZDistribution>
where
    F: Fn(u64) -> Result<LimitDraw> + Sync,
{
    if n_draws == 0 {
        return Err(Error::InvalidParameter("n_draws must be at least 1".into()));
    }
    let draws: Vec<LimitDraw> = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            draw(derive_seed(seed, &[i as u64])).map_err(|e| match e {
                Error::TruncationHit { .. } => Error::TruncationHit { index: i },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let dims = draws[0].functionals.shifts.len();
    let shifts = (0..dims)
        .map(|c| sorted(draws.iter().map(|d| d.functionals.shifts[c]).collect()))
        .collect();
    Ok(ZDistribution {
        m_total: sorted(draws.iter().map(|d| d.functionals.m_total).collect()),
        objective: sorted(draws.iter().map(|d| d.objective).collect()),
        shifts,
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri_drift() -> DriftSpec {
        DriftSpec::constant(1.0, 1.0, 0.5)
    }

    #[test]
    fn strong_drift_pins_argmax() {
        let d = draw_z_interval(
            &DriftSpec::constant(1e6, 1e6, 0.5),
            0.5,
            &WienerGrid::default(),
            3,
        )
        .unwrap();
        assert_eq!(d.functionals.shifts, vec![0.0, 0.0]);
        assert!(d.objective >= 0.0);
    }

    #[test]
    fn constrained_is_diagonal_and_dominated() {
        for seed in 0..50 {
            let g = WienerGrid::default();
            let u = draw_z_interval(&tri_drift(), 0.5, &g, seed).unwrap();
            let c = draw_z_interval_constrained(&tri_drift(), 0.5, &g, seed).unwrap();
            assert_eq!(c.functionals.shifts[0], -c.functionals.shifts[1]);
            assert!(c.objective <= u.objective + 1e-12);
            assert!(c.objective >= 0.0);
            assert!((c.functionals.m_plus - c.functionals.m_minus).abs() <= g.step);
        }
    }

    #[test]
    fn path_extension_is_consistent() {
        let short = IntervalPaths::generate(
            &WienerGrid {
                step: 0.01,
                c_max: 4.0,
            },
            9,
        );
        let long = IntervalPaths::generate(
            &WienerGrid {
                step: 0.01,
                c_max: 8.0,
            },
            9,
        );
        assert_eq!(short.left.plus[..], long.left.plus[..short.left.plus.len()]);
        assert_eq!(
            short.right.minus[..],
            long.right.minus[..short.right.minus.len()]
        );
        let a = short.unconstrained_argmax(&tri_drift(), 0.5, 1.0);
        let b = long.unconstrained_argmax(&tri_drift(), 0.5, 1.0);
        assert!(b.value >= a.value);
    }

    #[test]
    fn refinement_keeps_coarse_points() {
        let p = IntervalPaths::generate(
            &WienerGrid {
                step: 0.1,
                c_max: 1.0,
            },
            1,
        );
        let r = p.refine(2);
        assert_eq!(r.steps(), 2 * p.steps());
        for k in 0..=p.steps() {
            assert_eq!(r.left.plus[2 * k], p.left.plus[k]);
            assert_eq!(r.right.minus[2 * k], p.right.minus[k]);
        }
    }

    #[test]
    fn rescaling_keeps_argmax() {
        let p = IntervalPaths::generate(&WienerGrid::default(), 5);
        let base = p.unconstrained_argmax(&tri_drift(), 0.5, 1.0);
        for a in [0.5, 2.0, 10.0] {
            let s = p.unconstrained_argmax(&tri_drift(), 0.5, a);
            assert_eq!((s.k_left, s.k_right), (base.k_left, base.k_right));
            let c0 = p.constrained_argmax(&tri_drift(), 0.5, 1.0);
            let c = p.constrained_argmax(&tri_drift(), 0.5, a);
            assert_eq!(c.k_left, c0.k_left);
        }
    }

    #[test]
    fn distribution_is_deterministic() {
        let draw = |s| draw_z_interval(&tri_drift(), 0.5, &WienerGrid::default(), s);
        let a = z_distribution(draw, 20, 4).unwrap();
        let b = z_distribution(draw, 20, 4).unwrap();
        assert_eq!(a, b);
        let one = z_distribution(draw, 1, 4).unwrap();
        assert_eq!(one.draws[0], draw(derive_seed(4, &[0])).unwrap());
    }

    #[test]
    fn truncation_is_reported() {
        let weak = DriftSpec::constant(1e-6, 1e-6, 0.5);
        let grid = WienerGrid {
            step: 0.01,
            c_max: 0.5,
        };
        let draw = |s| draw_z_interval(&weak, 0.5, &grid, s);
        let err = z_distribution(draw, 50, 1).unwrap_err();
        assert!(matches!(err, Error::TruncationHit { .. }));
    }

    #[test]
    fn ball_draw_basics() {
        let grid = BallGrid {
            angles: 64,
            lattice: 21,
            ..BallGrid::default()
        };
        let strong = DriftSpec::constant(1e6, 1e6, 0.1);
        let d = draw_z_ball2d(&strong, 0.1, &grid, 1, false).unwrap();
        assert!(d.functionals.shifts.iter().all(|v| v.abs() < 1e-3));
        let drift =
            DriftSpec::constant(3.0 / std::f64::consts::PI, 3.0 / std::f64::consts::PI, 0.3);
        for seed in 0..5 {
            let u = draw_z_ball2d(&drift, 0.3, &grid, seed, false).unwrap();
            let c = draw_z_ball2d(&drift, 0.3, &grid, seed, true).unwrap();
            assert!(u.objective >= 0.0 && c.objective >= 0.0);
            assert!((c.functionals.m_plus - c.functionals.m_minus).abs() <= grid.cell_mass());
        }
    }
}
