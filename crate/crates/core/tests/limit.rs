use levelset_core::cylinder::DriftSpec;
use levelset_core::limit::{
    draw_z_ball2d, draw_z_interval, draw_z_interval_constrained, draw_z_interval_refined,
    z_distribution, BallGrid, TwoSidedPath, WienerGrid,
};
use levelset_core::stats::{ks_two_sample, mean, quantile_sorted, std_error};
use levelset_core::Error;

const LAMBDA: f64 = 0.5;

fn triangular_drift() -> DriftSpec {
    DriftSpec::constant(1.0, 1.0, LAMBDA)
}

#[test]
fn halving_the_step_moves_quantiles_less_than_one_percent() {
    let drift = triangular_drift();
    let grid = WienerGrid::default();
    for constrained in [false, true] {
        let law = |levels| {
            z_distribution(
                |s| draw_z_interval_refined(&drift, LAMBDA, &grid, s, levels, constrained),
                10_000,
                31,
            )
            .unwrap()
        };
        let coarse = law(0);
        let fine = law(1);
        for q in [0.5, 0.9] {
            let a = quantile_sorted(&coarse.m_total, q);
            let b = quantile_sorted(&fine.m_total, q);
            assert!(
                (a - b).abs() / b < 0.01,
                "constrained={constrained} q={q}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn doubling_the_truncation_does_not_change_the_law() {
    let drift = triangular_drift();
    let law = |c_max| {
        let grid = WienerGrid { step: 0.01, c_max };
        z_distribution(|s| draw_z_interval(&drift, LAMBDA, &grid, s), 10_000, 32).unwrap()
    };
    let d = ks_two_sample(&law(8.0).m_total, &law(16.0).m_total).unwrap();
    assert!(d <= 0.02, "KS {d}");
}

#[test]
fn ties_and_truncation_hits_are_rare() {
    let drift = triangular_drift();
    let z = z_distribution(
        |s| draw_z_interval(&drift, LAMBDA, &WienerGrid::default(), s),
        10_000,
        33,
    )
    .unwrap();
    assert!(z.tie_fraction() < 1e-3, "tie fraction {}", z.tie_fraction());
    // Endpoint argmaxes are symmetric in law.
    let right: Vec<f64> = z.draws.iter().map(|d| d.functionals.shifts[1]).collect();
    assert!(mean(&right).abs() <= 4.0 * std_error(&right));
    let left = &z.shifts[0];
    let neg_right: Vec<f64> = right.iter().map(|x| -x).collect();
    assert!(ks_two_sample(left, &neg_right).unwrap() <= 0.03);
}

#[test]
fn constrained_draws_are_balanced_and_dominated() {
    let drift = triangular_drift();
    let grid = WienerGrid::default();
    for seed in 0..200 {
        let free = draw_z_interval(&drift, LAMBDA, &grid, seed).unwrap();
        let bal = draw_z_interval_constrained(&drift, LAMBDA, &grid, seed).unwrap();
        assert!(bal.objective <= free.objective + 1e-12);
        assert_eq!(bal.functionals.m_plus, bal.functionals.m_minus);
    }
}

#[test]
fn truncation_is_reported() {
    // Almost no drift: the argmax wanders to the edge of a short grid.
    let drift = DriftSpec::constant(1e-9, 1e-9, LAMBDA);
    let grid = WienerGrid {
        step: 0.01,
        c_max: 0.1,
    };
    let r = z_distribution(|s| draw_z_interval(&drift, LAMBDA, &grid, s), 200, 34);
    assert!(matches!(r, Err(Error::TruncationHit { .. })));
}

#[test]
fn refinement_keeps_coarse_values() {
    let p = TwoSidedPath::generate(0.1, 50, 1.0, 1, 2);
    let f = p.refine(3);
    assert_eq!(f.steps(), 100);
    for k in -50..=50i64 {
        assert_eq!(f.at(2 * k), p.at(k));
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let drift = triangular_drift();
    assert!(draw_z_interval(&drift, 0.0, &WienerGrid::default(), 1).is_err());
    assert!(draw_z_interval(
        &drift,
        LAMBDA,
        &WienerGrid {
            step: 0.0,
            c_max: 8.0
        },
        1
    )
    .is_err());
    assert!(z_distribution(
        |s| draw_z_interval(&drift, LAMBDA, &WienerGrid::default(), s),
        0,
        1
    )
    .is_err());
    let bad = BallGrid {
        lattice: 4,
        ..BallGrid::default()
    };
    assert!(draw_z_ball2d(&drift, LAMBDA, &bad, 1, false).is_err());
}

#[test]
fn planar_draws_have_the_right_shape() {
    let grid = BallGrid {
        angles: 64,
        ds: 0.05,
        c_max: 4.0,
        radius: 0.5,
        lattice: 21,
        span: 2.0,
    };
    let drift = DriftSpec::constant(3.0 / std::f64::consts::PI, 3.0 / std::f64::consts::PI, 0.5);
    for seed in 0..5 {
        let free = draw_z_ball2d(&drift, 0.5, &grid, seed, false).unwrap();
        let bal = draw_z_ball2d(&drift, 0.5, &grid, seed, true).unwrap();
        assert_eq!(bal.functionals.shifts[2], 0.0);
        assert!(bal.objective <= free.objective + 1e-9);
        assert!((bal.functionals.m_plus - bal.functionals.m_minus).abs() < 1e-9);
        assert_eq!(free.functionals.shifts.len(), 3);
    }
}
