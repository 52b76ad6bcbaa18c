//! Fast invariant checks shared by the `selftest` command and the tests.

use std::f64::consts::PI;

use rand::Rng as _;

use crate::cylinder::{demagnify, drift_d, empirical_drift_dn, magnify, CylinderSet, DriftSpec};
use crate::estimators::{brute_force_oracle_1d_with, estimate_1d, EstimatorKind, TieRule};
use crate::geometry::{
    parallel_set_volume, project, steiner_data, sym_diff_volume, ConvexBody, Ellipse, Side, Square,
};
use crate::models::builtin_model;
use crate::rng::{rng_from_seed, Rng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    /// Tie rule used by the brute-force oracle. Anything other than the
    /// default makes the oracle-equivalence check fail on tied samples.
    pub oracle_tie_rule: TieRule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Random estimator for samples spread over roughly `[-2, 2]`.
pub fn random_kind(rng: &mut Rng) -> EstimatorKind {
    let base = match rng.random_range(0..4) {
        0 => EstimatorKind::ExcessMass {
            lambda: rng.random_range(0.0..4.0),
        },
        1 => EstimatorKind::MinVolume {
            p_lambda: rng.random_range(0.01..=1.0),
        },
        2 => EstimatorKind::MaxProb {
            v_lambda: rng.random_range(0.01..3.0),
        },
        _ => EstimatorKind::MaxProbEqualVol {
            v_lambda: rng.random_range(0.01..3.0),
        },
    };
    if rng.random_bool(0.2) && !matches!(base, EstimatorKind::MaxProbEqualVol { .. }) {
        EstimatorKind::Relaxed {
            inner: Box::new(base),
            delta_n: rng.random_range(0.0..1.0),
        }
    } else {
        base
    }
}

/// Sorted sample of continuous values.
pub fn continuous_sample(rng: &mut Rng, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Sorted sample on a dyadic grid with many ties; with a power-of-two size
/// and dyadic parameters every objective is computed exactly.
pub fn tied_sample(rng: &mut Rng) -> Vec<f64> {
    let n = 1usize << rng.random_range(0..6);
    let mut xs: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0..16) as f64 / 8.0)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs
}

pub fn tied_kind(rng: &mut Rng) -> EstimatorKind {
    let dyadic = |rng: &mut Rng| [0.25, 0.5, 1.0, 2.0][rng.random_range(0..4)];
    match rng.random_range(0..4) {
        0 => EstimatorKind::ExcessMass {
            lambda: dyadic(rng),
        },
        1 => EstimatorKind::MinVolume {
            p_lambda: [0.25, 0.5, 0.75, 1.0][rng.random_range(0..4)],
        },
        2 => EstimatorKind::MaxProb {
            v_lambda: dyadic(rng),
        },
        _ => EstimatorKind::MaxProbEqualVol {
            v_lambda: dyadic(rng),
        },
    }
}

/// Compares fast estimators against the brute-force oracle; returns the
/// number of mismatches and the first one found.
pub fn oracle_mismatches(
    instances: &[(Vec<f64>, EstimatorKind)],
    tie: TieRule,
) -> (usize, Option<String>) {
    let mut bad = 0;
    let mut first = None;
    for (xs, kind) in instances {
        let fast = estimate_1d(xs, kind);
        let slow = brute_force_oracle_1d_with(xs, kind, tie);
        let same = match (&fast, &slow) {
            (Ok(a), Ok(b)) => a.set == b.set && a.objective == b.objective,
            _ => false,
        };
        if !same {
            bad += 1;
            if first.is_none() {
                first = Some(format!("n={} {:?}", xs.len(), kind));
            }
        }
    }
    (bad, first)
}

fn check(name: &'static str, failures: Vec<String>) -> CheckResult {
    CheckResult {
        name,
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "ok".into()
        } else {
            failures.join("; ")
        },
    }
}

fn oracle_equivalence(opts: &SelftestOptions) -> CheckResult {
    let mut rng = rng_from_seed(0x5e1f);
    let mut instances = Vec::new();
    for _ in 0..300 {
        let n = rng.random_range(1..=50);
        instances.push((continuous_sample(&mut rng, n), random_kind(&mut rng)));
    }
    for _ in 0..300 {
        instances.push((tied_sample(&mut rng), tied_kind(&mut rng)));
    }
    let (bad, first) = oracle_mismatches(&instances, opts.oracle_tie_rule);
    let mut failures = Vec::new();
    if bad > 0 {
        failures.push(format!(
            "{bad} of {} instances differ, first {}",
            instances.len(),
            first.unwrap_or_default()
        ));
    }
    check("oracle_equivalence", failures)
}

fn steiner_identities() -> CheckResult {
    let mut failures = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let disc = ConvexBody::ball([0.0, 0.0], r).expect("valid disc");
        let data = steiner_data(&disc).expect("disc data");
        for eps in [0.01, 0.1, 0.5] {
            let shell = parallel_set_volume(&disc, eps, Side::Outer).expect("outer shell");
            let expansion = data.surface_measure * eps + PI * eps * eps;
            if (shell - expansion).abs() > 1e-14 * shell.max(1.0) {
                failures.push(format!("disc r={r} eps={eps}: {shell} vs {expansion}"));
            }
        }
        if data.surface_measure < 2.0 * (PI * disc.volume()).sqrt() * (1.0 - 1e-12) {
            failures.push(format!("isoperimetric bound fails for r={r}"));
        }
    }
    let sq = Square { side: 1.0 };
    let sd = sq.steiner_data();
    if sd.surface_measure < 2.0 * (PI * sq.area()).sqrt() {
        failures.push("isoperimetric bound fails for the unit square".into());
    }
    let iv = ConvexBody::interval(0.0, 1.0).expect("valid interval");
    let both = parallel_set_volume(&iv, 0.1, Side::Both).expect("interval shell");
    if (both - 0.4).abs() > 1e-15 {
        failures.push(format!("interval shell {both}"));
    }
    check("steiner_identities", failures)
}

fn projection_round_trip() -> CheckResult {
    let bodies = [
        ConvexBody::interval(-0.3, 1.1).expect("valid"),
        ConvexBody::ball([0.2, -0.1], 1.3).expect("valid"),
        ConvexBody::Ellipsoid(Ellipse::from_axes([0.1, 0.4], 2.0, 0.7, 0.6).expect("valid")),
    ];
    let mut rng = rng_from_seed(0x9e0);
    let mut failures = Vec::new();
    for body in &bodies {
        let mut worst: f64 = 0.0;
        for _ in 0..2000 {
            let x: Vec<f64> = (0..body.dimension())
                .map(|_| rng.random_range(-3.0..3.0))
                .collect();
            let Ok(p) = project(body, &x) else { continue };
            let err = x
                .iter()
                .enumerate()
                .map(|(i, xi)| (p.pi[i] + p.s * p.u[i] - xi).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(err);
            if (p.s > 0.0) == body.contains(&x) && p.s != 0.0 {
                failures.push(format!("sign disagrees with membership at {x:?}"));
                break;
            }
        }
        if worst > 1e-10 {
            failures.push(format!("round-trip error {worst:e}"));
        }
    }
    check("projection_round_trip", failures)
}

fn magnify_round_trip() -> CheckResult {
    let mut failures = Vec::new();
    let mut rng = rng_from_seed(0x7a0);
    let l = ConvexBody::interval(-0.5, 0.5).expect("valid");
    for _ in 0..200 {
        let a = ConvexBody::interval(
            -0.5 + rng.random_range(-0.2..0.2),
            0.5 + rng.random_range(-0.2..0.2),
        )
        .expect("valid");
        let eps = rng.random_range(0.001..0.2);
        let back = magnify(&l, &a, eps).and_then(|b| demagnify(&l, &b, eps));
        match back.and_then(|d| sym_diff_volume(&d.body, &a)) {
            Ok(v) if v <= 1e-9 => {}
            other => {
                failures.push(format!("interval round trip {other:?}"));
                break;
            }
        }
    }
    let disc = ConvexBody::ball([0.0, 0.0], 0.5).expect("valid");
    for _ in 0..10 {
        let a = ConvexBody::ball(
            [rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)],
            0.5 + rng.random_range(-0.05..0.05),
        )
        .expect("valid");
        let eps = 0.1;
        let back = magnify(&disc, &a, eps).and_then(|b| demagnify(&disc, &b, eps));
        match back.and_then(|d| sym_diff_volume(&d.body, &a)) {
            Ok(v) if v <= 1e-3 => {}
            other => {
                failures.push(format!("disc round trip {other:?}"));
                break;
            }
        }
    }
    check("magnify_round_trip", failures)
}

fn drift_closed_forms() -> CheckResult {
    let mut failures = Vec::new();
    let tri = builtin_model("triangular1d", 0.5).expect("valid model");
    let spec = DriftSpec::from_model(&tri);
    let b = CylinderSet::IntervalShifts {
        t_left: 1.0,
        t_right: 1.0,
    };
    if drift_d(&b, &spec) != 1.0 {
        failures.push(format!("D(IntervalShifts{{1,1}}) = {}", drift_d(&b, &spec)));
    }
    let g = DriftSpec::endpoints(1.0, 2.5, 0.5);
    let d = drift_d(
        &CylinderSet::IntervalShifts {
            t_left: 0.0,
            t_right: 2.0,
        },
        &g,
    );
    if d != 5.0 {
        failures.push(format!("D(IntervalShifts{{0,2}}) with g=2.5 is {d}"));
    }
    // Linear density near the boundary: D_n equals D.
    for n in [1000usize, 100_000] {
        let e = (n as f64).powf(-1.0 / 3.0);
        let a = ConvexBody::interval(-0.5 + 0.7 * e, 0.5 + 1.3 * e).expect("valid");
        let target = 0.5 * (0.7f64 * 0.7 + 1.3 * 1.3);
        match empirical_drift_dn(&tri, &a, n) {
            Ok(v) if (v - target).abs() < 1e-8 => {}
            other => failures.push(format!("D_n at n={n}: {other:?} vs {target}")),
        }
    }
    check("drift_closed_forms", failures)
}

fn model_oracles() -> CheckResult {
    let mut failures = Vec::new();
    let tri = builtin_model("triangular1d", 0.5).expect("valid model");
    match tri.excess_mass_of(&tri.oracle.body) {
        Ok(e) if (e - 0.25).abs() < 1e-10 => {}
        other => failures.push(format!("triangular e_lambda {other:?}")),
    }
    match tri.probability(&tri.oracle.body) {
        Ok(p) if (p - 0.75).abs() < 1e-10 => {}
        other => failures.push(format!("triangular p_lambda {other:?}")),
    }
    let cone = builtin_model("cone2d", 3.0 / (2.0 * PI)).expect("valid model");
    match cone.oracle.body {
        ConvexBody::Ball { radius, .. } if (radius - 0.5).abs() < 1e-10 => {}
        ref other => failures.push(format!("cone level set {other:?}")),
    }
    check("model_oracles", failures)
}

/// Runs every check; the whole suite takes well under a minute.
pub fn run_selftest(opts: &SelftestOptions) -> Vec<CheckResult> {
    vec![
        oracle_equivalence(opts),
        steiner_identities(),
        projection_round_trip(),
        magnify_round_trip(),
        drift_closed_forms(),
        model_oracles(),
    ]
}
