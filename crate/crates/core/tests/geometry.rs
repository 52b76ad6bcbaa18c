use std::f64::consts::PI;

use proptest::prelude::*;

use levelset_core::geometry::{
    hausdorff_distance, parallel_set_volume, project, signed_distance, steiner_data,
    sym_diff_volume, sym_diff_volume_with, ConvexBody, Ellipse, QmcConfig, Side, Square,
};
use levelset_core::Error;

fn interval() -> impl Strategy<Value = ConvexBody> {
    (-5.0..5.0f64, 0.01..5.0f64).prop_map(|(a, w)| ConvexBody::interval(a, a + w).unwrap())
}

fn ball() -> impl Strategy<Value = ConvexBody> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.1..3.0f64)
        .prop_map(|(x, y, r)| ConvexBody::ball([x, y], r).unwrap())
}

fn ellipse() -> impl Strategy<Value = ConvexBody> {
    (
        -1.0..1.0f64,
        -1.0..1.0f64,
        0.2..3.0f64,
        0.2..3.0f64,
        0.0..PI,
    )
        .prop_map(|(x, y, a1, a2, t)| {
            ConvexBody::Ellipsoid(Ellipse::from_axes([x, y], a1, a2, t).unwrap())
        })
}

fn planar() -> impl Strategy<Value = ConvexBody> {
    prop_oneof![ball(), ellipse()]
}

fn reconstruct(body: &ConvexBody, x: &[f64]) -> Option<(f64, bool)> {
    let p = project(body, x).ok()?;
    let err = x
        .iter()
        .enumerate()
        .map(|(i, xi)| (p.pi[i] + p.s * p.u[i] - xi).powi(2))
        .sum::<f64>()
        .sqrt();
    let unit = (p.u.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12;
    Some((err, unit && (p.s == 0.0 || (p.s < 0.0) == body.contains(x))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn interval_projection_round_trip(body in interval(), x in -10.0..10.0f64) {
        if let Some((err, sign_ok)) = reconstruct(&body, &[x]) {
            prop_assert!(err <= 1e-10);
            prop_assert!(sign_ok);
        }
    }

    #[test]
    fn planar_projection_round_trip(
        body in planar(),
        pts in prop::collection::vec((-4.0..4.0f64, -4.0..4.0f64), 40),
    ) {
        for (x, y) in pts {
            if let Some((err, sign_ok)) = reconstruct(&body, &[x, y]) {
                prop_assert!(err <= 1e-9, "error {} at ({}, {})", err, x, y);
                prop_assert!(sign_ok);
            }
        }
    }

    #[test]
    fn ball_signed_distance_is_exact(body in ball(), x in -4.0..4.0f64, y in -4.0..4.0f64) {
        if let ConvexBody::Ball { center, radius } = body {
            let exact = (x - center[0]).hypot(y - center[1]) - radius;
            if let Ok(s) = signed_distance(&body, &[x, y]) {
                prop_assert!((s - exact).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sym_diff_is_symmetric_and_zero_on_self(a in ball(), b in ball()) {
        let ab = sym_diff_volume(&a, &b).unwrap();
        let ba = sym_diff_volume(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ab >= 0.0);
        prop_assert!(sym_diff_volume(&a, &a).unwrap() <= 1e-12);
        prop_assert!(ab <= a.volume() + b.volume() + 1e-12);
    }

    #[test]
    fn interval_sym_diff_triangle(a in interval(), b in interval(), c in interval()) {
        let d = |x: &ConvexBody, y: &ConvexBody| sym_diff_volume(x, y).unwrap();
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn hausdorff_is_a_metric(a in interval(), b in interval(), c in interval()) {
        let h = |x: &ConvexBody, y: &ConvexBody| hausdorff_distance(x, y).unwrap();
        prop_assert_eq!(h(&a, &a), 0.0);
        prop_assert_eq!(h(&a, &b), h(&b, &a));
        prop_assert!(h(&a, &c) <= h(&a, &b) + h(&b, &c) + 1e-12);
    }

    #[test]
    fn ball_hausdorff_is_a_metric(a in ball(), b in ball(), c in ball()) {
        let h = |x: &ConvexBody, y: &ConvexBody| hausdorff_distance(x, y).unwrap();
        prop_assert!(h(&a, &a) <= 1e-12);
        prop_assert!((h(&a, &b) - h(&b, &a)).abs() <= 1e-12);
        prop_assert!(h(&a, &c) <= h(&a, &b) + h(&b, &c) + 1e-12);
    }

    #[test]
    fn disc_steiner_polynomial(r in 0.1..5.0f64, eps in 0.0..2.0f64) {
        let disc = ConvexBody::ball([0.0, 0.0], r).unwrap();
        let outer = parallel_set_volume(&disc, eps, Side::Outer).unwrap();
        let data = steiner_data(&disc).unwrap();
        let expected = data.surface_measure * eps + PI * eps * eps;
        prop_assert!((outer - expected).abs() <= 1e-12 * expected.max(1.0));
        prop_assert!(data.surface_measure >= 2.0 * (PI * disc.volume()).sqrt() * (1.0 - 1e-12));
    }
}

#[test]
fn projection_of_ten_thousand_points() {
    use rand::Rng as _;
    let mut rng = levelset_core::rng::rng_from_seed(44);
    let bodies = [
        ConvexBody::interval(-1.0, 2.0).unwrap(),
        ConvexBody::ball([0.5, -0.5], 1.5).unwrap(),
        ConvexBody::Ellipsoid(Ellipse::from_axes([0.0, 0.0], 3.0, 0.5, 0.3).unwrap()),
    ];
    for body in &bodies {
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..body.dimension())
                .map(|_| rng.random_range(-5.0..5.0))
                .collect();
            if let Some((err, sign_ok)) = reconstruct(body, &x) {
                assert!(err <= 1e-9, "{body:?} at {x:?}: {err}");
                assert!(sign_ok);
            }
        }
    }
}

#[test]
fn skeleton_and_dimension_errors() {
    let iv = ConvexBody::interval(0.0, 2.0).unwrap();
    assert!(matches!(project(&iv, &[1.0]), Err(Error::SkeletonPoint)));
    assert!(matches!(
        project(&iv, &[1.0, 0.0]),
        Err(Error::DimensionMismatch { .. })
    ));
    let disc = ConvexBody::ball([1.0, 1.0], 1.0).unwrap();
    assert!(matches!(
        project(&disc, &[1.0, 1.0]),
        Err(Error::SkeletonPoint)
    ));
    assert!(ConvexBody::interval(1.0, 0.0).is_err());
    assert!(ConvexBody::ball([0.0, 0.0], -1.0).is_err());
}

#[test]
fn square_is_handled_in_closed_form() {
    let sq = Square { side: 2.0 };
    let eps = 0.1;
    let outer = sq.parallel_set_volume(eps, Side::Outer).unwrap();
    assert!((outer - (8.0 * eps + PI * eps * eps)).abs() < 1e-14);
    let data = sq.steiner_data();
    assert!(data.surface_measure >= 2.0 * (PI * sq.area()).sqrt());
}

#[test]
fn ellipse_sym_diff_matches_qmc_scale() {
    let a = ConvexBody::Ellipsoid(Ellipse::from_axes([0.0, 0.0], 1.0, 0.5, 0.0).unwrap());
    let b = ConvexBody::Ellipsoid(Ellipse::from_axes([0.0, 0.0], 1.0, 0.5, PI / 2.0).unwrap());
    let est = sym_diff_volume_with(&a, &b, &QmcConfig::default()).unwrap();
    // Intersection of the two crossed ellipses: 4 ab atan(b/a) with a=1, b=0.5.
    let inter = 4.0 * 0.5 * (0.5f64).atan();
    let exact = 2.0 * (PI * 0.5 - inter);
    assert!((est.value - exact).abs() < 0.01, "{} vs {exact}", est.value);
}
