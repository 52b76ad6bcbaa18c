//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p levelset-core --test acceptance`. Any failing
//! criterion makes the target exit with a non-zero status.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng as _;

use levelset_core::cylinder::{
    demagnify, drift_d, empirical_drift_dn, m_intersection, m_measure, magnify, CylinderSet,
    DriftSpec,
};
use levelset_core::estimators::TieRule;
use levelset_core::experiments::{
    run_limit_comparison, run_rates, EstimatorChoice, ExperimentConfig, RatesOutput,
};
use levelset_core::geometry::{parallel_set_volume, sym_diff_volume, ConvexBody, Side};
use levelset_core::limit::{
    draw_z_interval, z_distribution, BallGrid, IntervalPaths, NoiseField, WienerGrid,
};
use levelset_core::models::builtin_model;
use levelset_core::rng::{derive_seed, rng_from_seed};
use levelset_core::selftest::{
    continuous_sample, oracle_mismatches, random_kind, tied_kind, tied_sample,
};
use levelset_core::stats::{covariance_with_se, ks_two_sample, variance_with_se};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct RatesRun {
    out: RatesOutput,
    elapsed: Duration,
}

fn rates_run() -> &'static RatesRun {
    static RUN: OnceLock<RatesRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let out = run_rates(&ExperimentConfig::default()).expect("rate experiment runs");
        RatesRun {
            out,
            elapsed: start.elapsed(),
        }
    })
}

fn criterion_01_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(20_001);
    let mut instances = Vec::with_capacity(1200);
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        instances.push((continuous_sample(&mut rng, n), random_kind(&mut rng)));
    }
    // Exact-arithmetic samples with heavy ties exercise the tie rule.
    for _ in 0..200 {
        instances.push((tied_sample(&mut rng), tied_kind(&mut rng)));
    }
    let (bad, first) = oracle_mismatches(&instances, TieRule::Lexicographic);
    let elapsed = start.elapsed();
    report(
        bad == 0 && elapsed < Duration::from_secs(10),
        format!(
            "{bad} mismatches in {} instances{}, {:.2}s",
            instances.len(),
            first.map(|f| format!(" (first: {f})")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_02_analytic_oracle() -> Outcome {
    let tri = builtin_model("triangular1d", 0.5).unwrap();
    let p = tri.probability(&tri.oracle.body).unwrap();
    let v = tri.oracle.body.volume();
    let e = tri.excess_mass_of(&tri.oracle.body).unwrap();
    let cone = builtin_model("cone2d", 3.0 / (2.0 * PI)).unwrap();
    let r = match cone.oracle.body {
        ConvexBody::Ball { radius, .. } => radius,
        _ => f64::NAN,
    };
    let boundary_density = cone.pdf(&[r, 0.0]);
    let cone_p = cone.probability(&cone.oracle.body).unwrap();
    let pass = (p - 0.75).abs() <= 1e-10
        && (v - 1.0).abs() <= 1e-10
        && (e - 0.25).abs() <= 1e-10
        && (r - 0.5).abs() <= 1e-10
        && (boundary_density - cone.lambda()).abs() <= 1e-10
        && (cone_p - cone.oracle.p_lambda).abs() <= 1e-6;
    report(
        pass,
        format!(
            "p={p:.15} v={v} e={e:.15} r={r:.15} f(r)-lambda={:e}",
            boundary_density - cone.lambda()
        ),
    )
}

fn criterion_03_constraint_identities() -> Outcome {
    let run = rates_run();
    let cfg = ExperimentConfig::default();
    let k = levelset_core::experiments::required_mass_violations(&cfg, &run.out.records);
    report(
        k == 0,
        format!("{k} violations in {} records", run.out.records.len()),
    )
}

fn criterion_04_cube_root_rate() -> Outcome {
    let run = rates_run();
    let em = run
        .out
        .summary
        .estimators
        .iter()
        .find(|s| s.estimator == EstimatorChoice::ExcessMass.name())
        .unwrap();
    let shrink_ok = em.shrink_factors.iter().all(|f| (1.6..=2.6).contains(f));
    let band_ok = em.normalized_spread <= 1.5;
    let time_ok = run.elapsed < Duration::from_secs(180);
    report(
        shrink_ok && band_ok && time_ok,
        format!(
            "shrink factors {:?}, normalized spread {:.3}, {:.1}s",
            em.shrink_factors,
            em.normalized_spread,
            run.elapsed.as_secs_f64()
        ),
    )
}

fn criterion_05_equivalence() -> Outcome {
    let run = rates_run();
    let eq = run.out.summary.equivalence.as_ref().unwrap();
    let medians: Vec<f64> = eq.levels.iter().map(|l| l.median).collect();
    let monotone = medians.windows(2).all(|w| w[1] < w[0]);
    let drop = medians[0] / medians[medians.len() - 1];
    report(
        monotone && drop >= 1.5,
        format!("normalized medians {medians:?}, overall drop {drop:.3}"),
    )
}

fn criterion_06_limit_law_agreement() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        estimators: vec![EstimatorChoice::ExcessMass, EstimatorChoice::MinVolume],
        ..ExperimentConfig::default()
    };
    let cmp = run_limit_comparison(&cfg).unwrap();
    let elapsed = start.elapsed();
    let em = cmp
        .get(EstimatorChoice::ExcessMass.name(), false)
        .unwrap()
        .ks_statistic;
    let mv = cmp
        .get(EstimatorChoice::MinVolume.name(), true)
        .unwrap()
        .ks_statistic;
    let mv_free = cmp
        .get(EstimatorChoice::MinVolume.name(), false)
        .unwrap()
        .ks_statistic;
    report(
        em <= 0.1 && mv <= 0.1 && elapsed < Duration::from_secs(300),
        format!(
            "KS excess-mass vs Z(B) {em:.4}, min-volume vs Z(B*) {mv:.4} \
             (min-volume vs Z(B) {mv_free:.4}), n={}, {:.1}s",
            cmp.n,
            elapsed.as_secs_f64()
        ),
    )
}

fn within(est: f64, se: f64, target: f64) -> bool {
    (est - target).abs() <= 3.0 * se
}

fn criterion_07_wiener_law() -> Outcome {
    const DRAWS: usize = 20_000;
    let grid = WienerGrid {
        step: 0.01,
        c_max: 3.0,
    };
    // Shifts in grid steps.
    let pairs: [((i64, i64), (i64, i64)); 10] = [
        ((100, 200), (100, 200)),
        ((100, 200), (50, 100)),
        ((100, 200), (-50, 100)),
        ((-100, -200), (-50, 150)),
        ((30, -70), (120, -20)),
        ((0, 150), (80, 250)),
        ((-120, 0), (-40, -90)),
        ((200, 200), (-200, -200)),
        ((75, -25), (75, -25)),
        ((10, 10), (250, 5)),
    ];
    let samples: Vec<Vec<(f64, f64)>> = {
        use rayon::prelude::*;
        (0..DRAWS)
            .into_par_iter()
            .map(|i| {
                let paths = IntervalPaths::generate(&grid, derive_seed(7_007, &[i as u64]));
                let mut row: Vec<(f64, f64)> = pairs
                    .iter()
                    .map(|(a, b)| (paths.w(a.0, a.1), paths.w(b.0, b.1)))
                    .collect();
                row.push((paths.w(100, 200), 0.0));
                row
            })
            .collect()
    };
    let h = grid.step;
    let shifts = |k: (i64, i64)| CylinderSet::IntervalShifts {
        t_left: k.0 as f64 * h,
        t_right: k.1 as f64 * h,
    };
    let mut failures = Vec::new();
    for (j, (a, b)) in pairs.iter().enumerate() {
        let x: Vec<f64> = samples.iter().map(|r| r[j].0).collect();
        let y: Vec<f64> = samples.iter().map(|r| r[j].1).collect();
        let (c, se) = covariance_with_se(&x, &y);
        let target = m_intersection(&shifts(*a), &shifts(*b)).unwrap();
        if !within(c, se, target) {
            failures.push(format!("pair {j}: cov {c:.4} vs {target} (se {se:.4})"));
        }
    }
    let w12: Vec<f64> = samples.iter().map(|r| r[pairs.len()].0).collect();
    let (v, vse) = variance_with_se(&w12);
    if !within(v, vse, 3.0) {
        failures.push(format!(
            "Var W(IntervalShifts{{1,2}}) = {v:.4} (se {vse:.4})"
        ));
    }

    // Planar field: radial graphs with heights on the cell grid.
    let ball = BallGrid {
        angles: 16,
        ds: 0.05,
        c_max: 1.0,
        ..BallGrid::default()
    };
    let graphs: Vec<Vec<f64>> = (0..6)
        .map(|g| {
            (0..ball.angles)
                .map(|k| (((k * (g + 3) + g) % 31) as f64 - 15.0) * ball.ds)
                .collect()
        })
        .collect();
    let planar: Vec<Vec<f64>> = (0..DRAWS)
        .map(|i| {
            let f = NoiseField::generate(&ball, derive_seed(7_008, &[i as u64]));
            graphs.iter().map(|h| f.w(h)).collect()
        })
        .collect();
    for (a, b) in [(0, 1), (2, 3), (4, 5), (1, 4)] {
        let x: Vec<f64> = planar.iter().map(|r| r[a]).collect();
        let y: Vec<f64> = planar.iter().map(|r| r[b]).collect();
        let (c, se) = covariance_with_se(&x, &y);
        let ga = CylinderSet::RadialGraph {
            radius: 1.0,
            h: graphs[a].clone(),
        };
        let gb = CylinderSet::RadialGraph {
            radius: 1.0,
            h: graphs[b].clone(),
        };
        let target = m_intersection(&ga, &gb).unwrap();
        if !within(c, se, target) {
            failures.push(format!(
                "planar pair ({a},{b}): cov {c:.4} vs {target:.4} (se {se:.4})"
            ));
        }
    }
    report(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "10 interval pairs and 4 planar pairs within 3 SE; Var W = {v:.4} (se {vse:.4})"
            )
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_08_argmax_scaling() -> Outcome {
    const DRAWS: usize = 10_000;
    let lambda = 0.5;
    let grid = WienerGrid::default();
    let law = |g: f64, seed: u64| {
        let drift = DriftSpec::constant(g, g, lambda);
        let z = z_distribution(|s| draw_z_interval(&drift, lambda, &grid, s), DRAWS, seed).unwrap();
        z.m_total
            .iter()
            .map(|m| m * g.powf(2.0 / 3.0))
            .collect::<Vec<f64>>()
    };
    let base = law(1.0, 8_001);
    let mut stats = Vec::new();
    for (g, seed) in [(0.5, 8_002), (2.0, 8_003)] {
        stats.push((g, ks_two_sample(&base, &law(g, seed)).unwrap()));
    }
    report(
        stats.iter().all(|(_, ks)| *ks <= 0.05),
        format!("KS after g^(2/3) rescaling: {stats:?}"),
    )
}

fn criterion_09_steiner_identities() -> Outcome {
    let disc = ConvexBody::ball([0.0, 0.0], 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for eps in [0.01, 0.1, 0.5] {
        let shell = parallel_set_volume(&disc, eps, Side::Outer).unwrap();
        let exact = 2.0 * PI * eps + PI * eps * eps;
        worst = worst.max((shell - exact).abs() / exact);
    }
    let shell_ok = worst <= 4.0 * f64::EPSILON;

    // Perturbed disc whose magnification is fixed: |mu/eps - M| / eps = K.
    let ks: Vec<f64> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&eps| {
            let a = ConvexBody::ball([0.4 * eps, 0.0], 1.0 + 0.7 * eps).unwrap();
            let mu = sym_diff_volume(&a, &disc).unwrap();
            let m = m_measure(&magnify(&disc, &a, eps).unwrap());
            (mu / eps - m).abs() / eps
        })
        .collect();
    let k_max = ks.iter().cloned().fold(f64::MIN, f64::max);
    let k_min = ks.iter().cloned().fold(f64::MAX, f64::min);
    let k_ok = k_min > 0.0 && k_max / k_min <= 1.5;
    report(
        shell_ok && k_ok,
        format!("shell relative error {worst:e}; K over eps 0.1, 0.01, 0.001 = {ks:?}"),
    )
}

fn criterion_10_round_trips() -> Outcome {
    let mut rng = rng_from_seed(10_010);
    let l = ConvexBody::interval(-0.5, 0.5).unwrap();
    let mut worst_interval: f64 = 0.0;
    for _ in 0..1000 {
        let a = ConvexBody::interval(
            -0.5 + rng.random_range(-0.3..0.3),
            0.5 + rng.random_range(-0.3..0.3),
        )
        .unwrap();
        let eps = rng.random_range(1e-3..0.3);
        let back = demagnify(&l, &magnify(&l, &a, eps).unwrap(), eps).unwrap();
        worst_interval = worst_interval.max(sym_diff_volume(&back.body, &a).unwrap());
    }
    let disc = ConvexBody::ball([0.0, 0.0], 0.5).unwrap();
    let mut worst_ball: f64 = 0.0;
    for _ in 0..50 {
        let a = ConvexBody::ball(
            [rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)],
            0.5 + rng.random_range(-0.05..0.05),
        )
        .unwrap();
        let eps = rng.random_range(0.01..0.2);
        let back = demagnify(&disc, &magnify(&disc, &a, eps).unwrap(), eps).unwrap();
        worst_ball = worst_ball.max(sym_diff_volume(&back.body, &a).unwrap());
    }
    report(
        worst_interval <= 1e-9 && worst_ball <= 1e-3,
        format!("worst interval sym diff {worst_interval:e}, worst ball {worst_ball:e}"),
    )
}

fn criterion_11_drift_convergence() -> Outcome {
    let ns = [1_000usize, 10_000, 100_000, 1_000_000];
    let errors = |model: &str, lambda: f64, t: (f64, f64)| -> Vec<f64> {
        let m = builtin_model(model, lambda).unwrap();
        let (a, b) = match m.oracle.body {
            ConvexBody::Interval { a, b } => (a, b),
            _ => unreachable!(),
        };
        let d = drift_d(
            &CylinderSet::IntervalShifts {
                t_left: t.0,
                t_right: t.1,
            },
            &DriftSpec::from_model(&m),
        );
        ns.iter()
            .map(|&n| {
                let eps = (n as f64).powf(-1.0 / 3.0);
                let set = ConvexBody::interval(a - t.0 * eps, b + t.1 * eps).unwrap();
                (empirical_drift_dn(&m, &set, n).unwrap() - d).abs()
            })
            .collect()
    };
    // The triangular density is linear near its level set, so once the
    // shifted endpoints stay inside the linear piece D_n equals D up to
    // rounding; the outward shift of 6 leaves it at n = 1000.
    let tri = errors("triangular1d", 0.5, (6.0, -2.0));
    let tri_ok = tri[0] > 1e-3 && tri.windows(2).all(|w| w[1] <= w[0] + 1e-9) && tri[3] <= 1e-9;
    let normal = errors("normal1d", 0.2, (1.0, 1.5));
    let normal_ok = normal.windows(2).all(|w| w[1] < w[0]);
    report(
        tri_ok && normal_ok,
        format!("|D_n - D| triangular {tri:?}; normal {normal:?}"),
    )
}

fn criterion_12_determinism() -> Outcome {
    let run_in = |threads: usize, cfg: &ExperimentConfig| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            output_dir: Some(dir.path().join("out")),
            ..cfg.clone()
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_rates(&cfg)).unwrap();
        ["records.csv", "manifest.json", "summary.json"]
            .iter()
            .map(|f| std::fs::read(dir.path().join("out").join(f)).unwrap())
            .collect::<Vec<_>>()
    };
    let line = ExperimentConfig {
        experiment_id: "determinism".into(),
        n_grid: vec![200, 1600],
        replications: 40,
        ..ExperimentConfig::default()
    };
    let plane = ExperimentConfig {
        experiment_id: "determinism-2d".into(),
        model: "cone2d".into(),
        lambda: 3.0 / (2.0 * PI),
        class: levelset_core::estimators::SetClass::Balls,
        n_grid: vec![60, 120],
        replications: 4,
        ..ExperimentConfig::default()
    };
    let mut same = true;
    for cfg in [&line, &plane] {
        let one = run_in(1, cfg);
        same &= one == run_in(4, cfg) && one == run_in(1, cfg);
    }
    let limit = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let drift = DriftSpec::constant(1.0, 1.0, 0.5);
        pool.install(|| {
            z_distribution(
                |s| draw_z_interval(&drift, 0.5, &WienerGrid::default(), s),
                500,
                12,
            )
        })
        .unwrap()
    };
    same &= limit(1) == limit(4);
    report(
        same,
        "1D and 2D rate outputs and limit draws identical across 1 and 4 workers and re-runs",
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("oracle equivalence", criterion_01_oracle_equivalence),
        ("analytic oracle", criterion_02_analytic_oracle),
        ("constraint identities", criterion_03_constraint_identities),
        ("cube-root rate", criterion_04_cube_root_rate),
        ("min-volume/max-prob equivalence", criterion_05_equivalence),
        ("limit-law agreement", criterion_06_limit_law_agreement),
        ("Wiener law", criterion_07_wiener_law),
        ("argmax scaling", criterion_08_argmax_scaling),
        ("Steiner identities", criterion_09_steiner_identities),
        ("round trips", criterion_10_round_trips),
        ("drift convergence", criterion_11_drift_convergence),
        ("determinism", criterion_12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            report(false, format!("panicked: {msg}"))
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
