use proptest::prelude::*;

use levelset_core::estimators::{
    brute_force_oracle_1d, estimate, estimate_1d, required_count, EstimatorKind, SearchConfig,
    SetClass,
};
use levelset_core::geometry::{min_enclosing_circle, ConvexBody, Point2};
use levelset_core::models::{builtin_model, Sample};
use levelset_core::Error;

fn sorted_sample(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 1..=max_n).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

fn gridded_sample(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u8..12, 1..=max_n).prop_map(|v| {
        let mut v: Vec<f64> = v.into_iter().map(|k| k as f64 * 0.25).collect();
        v.sort_by(f64::total_cmp);
        v
    })
}

fn kind() -> impl Strategy<Value = EstimatorKind> {
    prop_oneof![
        (0.0..4.0f64).prop_map(|lambda| EstimatorKind::ExcessMass { lambda }),
        (0.01..=1.0f64).prop_map(|p_lambda| EstimatorKind::MinVolume { p_lambda }),
        (0.01..4.0f64).prop_map(|v_lambda| EstimatorKind::MaxProb { v_lambda }),
        (0.01..4.0f64).prop_map(|v_lambda| EstimatorKind::MaxProbEqualVol { v_lambda }),
    ]
}

fn interval(r: &levelset_core::EstimateResult) -> (f64, f64) {
    match r.set {
        ConvexBody::Interval { a, b } => (a, b),
        _ => panic!("not an interval"),
    }
}

fn count_in(xs: &[f64], a: f64, b: f64) -> usize {
    xs.iter().filter(|x| **x >= a && **x <= b).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fast_matches_oracle(xs in sorted_sample(60), k in kind()) {
        let fast = estimate_1d(&xs, &k).unwrap();
        let slow = brute_force_oracle_1d(&xs, &k).unwrap();
        prop_assert_eq!(&fast.set, &slow.set);
        prop_assert_eq!(fast.objective, slow.objective);
    }

    #[test]
    fn fast_matches_oracle_with_ties(xs in gridded_sample(40), k in kind()) {
        let fast = estimate_1d(&xs, &k).unwrap();
        let slow = brute_force_oracle_1d(&xs, &k).unwrap();
        prop_assert_eq!(&fast.set, &slow.set);
        prop_assert_eq!(fast.objective, slow.objective);
    }

    #[test]
    fn relaxed_matches_oracle(xs in sorted_sample(40), k in kind(), delta in 0.0..2.0f64) {
        prop_assume!(!matches!(k, EstimatorKind::MaxProbEqualVol { .. }));
        let relaxed = EstimatorKind::Relaxed { inner: Box::new(k.clone()), delta_n: delta };
        let fast = estimate_1d(&xs, &relaxed).unwrap();
        let slow = brute_force_oracle_1d(&xs, &relaxed).unwrap();
        prop_assert_eq!(&fast.set, &slow.set);
        let exact = estimate_1d(&xs, &k).unwrap();
        let slack = delta * (xs.len() as f64).powf(-2.0 / 3.0);
        let gap = match k {
            EstimatorKind::MinVolume { .. } => fast.objective - exact.objective,
            _ => exact.objective - fast.objective,
        };
        prop_assert!(gap >= -1e-12 && gap <= slack + 1e-12);
    }

    #[test]
    fn min_volume_hits_required_mass(xs in sorted_sample(80), p in 0.01..=1.0f64) {
        let r = estimate_1d(&xs, &EstimatorKind::MinVolume { p_lambda: p }).unwrap();
        let (a, b) = interval(&r);
        prop_assert!(count_in(&xs, a, b) >= required_count(xs.len(), p));
        prop_assert_eq!(r.diagnostics.empirical_count, required_count(xs.len(), p));
    }

    #[test]
    fn max_prob_respects_volume(xs in sorted_sample(80), v in 0.01..4.0f64) {
        let r = estimate_1d(&xs, &EstimatorKind::MaxProb { v_lambda: v }).unwrap();
        let (a, b) = interval(&r);
        prop_assert!(b - a <= v);
        prop_assert_eq!(count_in(&xs, a, b), r.diagnostics.empirical_count);
        let eq = estimate_1d(&xs, &EstimatorKind::MaxProbEqualVol { v_lambda: v }).unwrap();
        let (ea, eb) = interval(&eq);
        prop_assert!(((eb - ea) - v).abs() <= 1e-12 * v.max(1.0) * 8.0);
        prop_assert!(eq.diagnostics.empirical_count >= r.diagnostics.empirical_count);
    }

    #[test]
    fn monotone_in_parameters(xs in sorted_sample(60), t in 0.05..0.9f64, dt in 0.01..0.1f64) {
        let mv = |p: f64| estimate_1d(&xs, &EstimatorKind::MinVolume { p_lambda: p }).unwrap().objective;
        prop_assert!(mv(t) <= mv(t + dt));
        let mp = |v: f64| estimate_1d(&xs, &EstimatorKind::MaxProb { v_lambda: v }).unwrap().objective;
        prop_assert!(mp(t) <= mp(t + dt));
        let em = |l: f64| estimate_1d(&xs, &EstimatorKind::ExcessMass { lambda: l }).unwrap().objective;
        prop_assert!(em(t) >= em(t + dt));
    }
}

#[test]
fn degenerate_samples() {
    let one = [0.3];
    let r = estimate_1d(&one, &EstimatorKind::ExcessMass { lambda: 1.0 }).unwrap();
    assert_eq!(r.set, ConvexBody::interval(0.3, 0.3).unwrap());
    assert_eq!(r.objective, 1.0);
    assert!(matches!(
        estimate_1d(&[], &EstimatorKind::MinVolume { p_lambda: 0.5 }),
        Err(Error::EmptySample)
    ));
    let bad = Sample::Line(vec![0.0, f64::NAN]);
    assert!(estimate(
        &bad,
        &EstimatorKind::MinVolume { p_lambda: 0.5 },
        SetClass::Intervals,
        &SearchConfig::default()
    )
    .is_err());
    assert!(EstimatorKind::MinVolume { p_lambda: 0.0 }
        .validate()
        .is_err());
    assert!(EstimatorKind::ExcessMass { lambda: -1.0 }
        .validate()
        .is_err());
}

#[test]
fn oracle_rejects_large_samples() {
    let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
    assert!(matches!(
        brute_force_oracle_1d(&xs, &EstimatorKind::ExcessMass { lambda: 1.0 }),
        Err(Error::SampleTooLarge { .. })
    ));
}

#[test]
fn min_volume_ball_matches_subset_enumeration() {
    let model = builtin_model("gaussian2d", 0.05).unwrap();
    for seed in 0..4 {
        let Sample::Plane(pts) = model.sample(9, seed) else {
            unreachable!()
        };
        let k = 4;
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << pts.len()) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let subset: Vec<Point2> = (0..pts.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| pts[i])
                .collect();
            best = best.min(min_enclosing_circle(&subset, 0).radius);
        }
        let r = estimate(
            &Sample::Plane(pts.clone()),
            &EstimatorKind::MinVolume {
                p_lambda: k as f64 / pts.len() as f64,
            },
            SetClass::Balls,
            &SearchConfig::default(),
        )
        .unwrap();
        let area = std::f64::consts::PI * best * best;
        assert!(
            (r.objective - area).abs() <= 1e-6 * area,
            "seed {seed}: {} vs {area}",
            r.objective
        );
        assert!(r.diagnostics.empirical_count >= k);
    }
}

#[test]
fn planar_constraints_hold() {
    let model = builtin_model("cone2d", 0.3).unwrap();
    let sample = model.sample(200, 5);
    let search = SearchConfig::default();
    for class in [SetClass::Balls, SetClass::Ellipsoids] {
        let mp = estimate(
            &sample,
            &EstimatorKind::MaxProb { v_lambda: 1.0 },
            class,
            &search,
        )
        .unwrap();
        assert!(mp.set.volume() <= 1.0 + 1e-12);
        assert_eq!(sample.count_in(&mp.set), mp.diagnostics.empirical_count);
        let mv = estimate(
            &sample,
            &EstimatorKind::MinVolume { p_lambda: 0.5 },
            class,
            &search,
        )
        .unwrap();
        assert!(sample.count_in(&mv.set) >= 100);
        let em = estimate(
            &sample,
            &EstimatorKind::ExcessMass { lambda: 0.3 },
            class,
            &search,
        )
        .unwrap();
        assert!(em.objective >= 0.0);
        let direct = sample.count_in(&em.set) as f64 / 200.0 - 0.3 * em.set.volume();
        assert!((direct - em.objective).abs() <= 1e-12);
    }
}

#[test]
fn planar_search_is_deterministic() {
    let model = builtin_model("gaussian2d", 0.05).unwrap();
    let sample = model.sample(150, 8);
    let kind = EstimatorKind::ExcessMass { lambda: 0.05 };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                estimate(
                    &sample,
                    &kind,
                    SetClass::Ellipsoids,
                    &SearchConfig::default(),
                )
            })
            .unwrap()
    };
    assert_eq!(run(1), run(4));
}
