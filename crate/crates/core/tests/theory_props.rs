mod common;

use common::{bisect_fixed_point, enumerated_or, rel_err, sample_case, COMPARE_CASES};
use nuindex_core::theory::*;
use proptest::prelude::*;

fn valid_point() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.01f64..0.99, 0.01f64..0.99, 0.01f64..0.99, 0.0f64..=1.0)
        .prop_map(|(alpha, pi, b0, u)| (alpha, pi, b0, (1e-3 + u * (1.0 / b0 - 1e-3)).min(1.0 / b0)))
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn closed_form_matches_enumeration((alpha, pi, b0, b1) in valid_point()) {
        let pt = TheoryPoint::new(alpha, pi, b0, b1).unwrap();
        prop_assert!(rel_err(or_closed_form(&pt), enumerated_or(alpha, pi, b0, b1)) <= 1e-12);
    }

    #[test]
    fn cross_ratio_is_free_of_alpha((alpha, pi, b0, b1) in valid_point(), other in 0.01f64..0.99) {
        let pt = TheoryPoint::new(alpha, pi, b0, b1).unwrap();
        let ratio = |a: f64| odds(theta_x(&pt, a, true).unwrap()) / odds(theta_x(&pt, a, false).unwrap());
        prop_assert!(rel_err(ratio(alpha), ratio(other)) <= 1e-12);
        prop_assert!(rel_err(ratio(alpha), or_closed_form(&pt)) <= 1e-12);
    }

    #[test]
    fn sign_of_effect_is_preserved((alpha, pi, b0, b1) in valid_point()) {
        let pt = TheoryPoint::new(alpha, pi, b0, b1).unwrap();
        prop_assert_eq!(sign(or_closed_form(&pt) - 1.0), sign(b1 - 1.0));
        prop_assert!(or_closed_form(&pt) > 0.0);
    }

    #[test]
    fn denominator_is_positive((_alpha, pi, b0, b1) in valid_point()) {
        prop_assert!(b0 * pi * (1.0 - b1) + (1.0 - b0) > 0.0);
        let at_bound = 1.0 / b0;
        prop_assert!(b0 * pi * (1.0 - at_bound) + (1.0 - b0) > 0.0);
    }

    #[test]
    fn phi_is_a_fixed_point(pi in 0.01f64..0.99, b0 in 0.01f64..0.99) {
        let phi = phi_threshold(pi, b0).unwrap();
        if phi <= 1.0 / b0 {
            let pt = TheoryPoint::new(0.5, pi, b0, phi).unwrap();
            prop_assert!((or_closed_form(&pt) - phi).abs() <= 1e-10);
        }
    }

    #[test]
    fn magnitude_relation_agrees_with_phi((alpha, pi, b0, b1) in valid_point()) {
        let pt = TheoryPoint::new(alpha, pi, b0, b1).unwrap();
        let phi = phi_threshold(pi, b0).unwrap();
        // Away from the two equality points the classification is determined by phi.
        prop_assume!((b1 - phi).abs() > 1e-6 && (b1 - 1.0).abs() > 1e-6);
        let expected = if b1 > phi { MagnitudeRelation::OrFarther } else { MagnitudeRelation::OrCloser };
        prop_assert_eq!(magnitude_relation(&pt), expected);
    }

    #[test]
    fn attenuation_region_means_or_closer(pi in 0.01f64..0.99, b0 in 0.01f64..0.99, u in 0.001f64..1.0) {
        if null_attenuation_region(pi, b0).unwrap() {
            let b1 = u / b0;
            prop_assume!((b1 - 1.0).abs() > 1e-9);
            let pt = TheoryPoint::new(0.8, pi, b0, b1).unwrap();
            prop_assert_eq!(magnitude_relation(&pt), MagnitudeRelation::OrCloser);
        }
    }

    #[test]
    fn sufficient_condition_implies_region(pi in 0.001f64..(1.0 / 3.0), b0 in 0.001f64..0.5) {
        prop_assert!(null_attenuation_region(pi, b0).unwrap());
    }

    #[test]
    fn unconfounded_joint_reduces_to_closed_form((alpha, pi, b0, b1) in valid_point()) {
        let pt = TheoryPoint::new(alpha, pi, b0, b1).unwrap();
        let jt = build_confounded_joint(alpha, pi, b0, b1, &ConfounderDesign::NONE).unwrap();
        prop_assert!(rel_err(or_from_joint(&jt, false).unwrap(), or_closed_form(&pt)) <= 1e-12);
    }

    #[test]
    fn confounder_of_infection_only_changes_nothing(
        pi in 0.05f64..0.95, b0 in 0.05f64..0.6, u in 0.05f64..0.95, rr_az in 0.6f64..1.2,
    ) {
        let b1 = u / b0;
        let design = ConfounderDesign { pz: 0.55, rr_az, rr_xz: 1.0 };
        let pt = TheoryPoint::new(0.7, pi, b0, b1).unwrap();
        let jt = build_confounded_joint(0.7, pi, b0, b1, &design).unwrap();
        prop_assert!(rel_err(or_from_joint(&jt, false).unwrap(), or_closed_form(&pt)) <= 1e-10);
    }

    #[test]
    fn weighted_or_is_null_without_latent_effect(
        pi in 0.05f64..0.95, b0 in 0.05f64..0.4, rr_az in 1.05f64..1.3, rr_xz in 1.05f64..2.0,
    ) {
        let design = ConfounderDesign { pz: 0.55, rr_az, rr_xz };
        let jt = build_confounded_joint(0.7, pi, b0, 1.0, &design).unwrap();
        prop_assert!((or_from_joint(&jt, true).unwrap() - 1.0).abs() <= 1e-10);
        prop_assert!(or_from_joint(&jt, false).unwrap() > 1.0);
    }

    #[test]
    fn weighted_or_equals_iptw_form(
        pi in 0.05f64..0.95, b0 in 0.05f64..0.4, u in 0.05f64..0.95, rr_az in 0.6f64..1.3, rr_xz in 0.5f64..2.0,
    ) {
        let design = ConfounderDesign { pz: 0.55, rr_az, rr_xz };
        let b1 = u / b0 / rr_xz.max(1.0) / 2.0;
        if let Ok(jt) = build_confounded_joint(0.7, pi, b0, b1, &design) {
            prop_assert!(rel_err(or_from_joint(&jt, true).unwrap(), iptw_att_odds_ratio(&jt).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn joint_table_invariants(
        pi in 0.05f64..0.95, b0 in 0.05f64..0.4, rr_az in 0.6f64..1.3, rr_xz in 0.5f64..2.0,
    ) {
        let design = ConfounderDesign { pz: 0.55, rr_az, rr_xz };
        if let Ok(jt) = build_confounded_joint(0.7, pi, b0, 1.2, &design) {
            let total: f64 = jt.cells().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert_eq!(jt.marginal(|_, y, a, _| y == 1 && a == 0), 0.0);
            for z in 0..2 {
                let latent = jt.marginal(|zz, y, a, _| zz == z && y == 1 && a == 1);
                let infected = jt.marginal(|zz, _, a, _| zz == z && a == 1);
                prop_assert!((latent / infected - pi).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn conditional_solver_round_trips(marginal in 0.05f64..0.95, pz in 0.05f64..0.95, rr in 0.3f64..3.0) {
        if let Ok((p0, p1)) = solve_conditional_from_marginal(marginal, pz, rr) {
            prop_assert!((p1 - rr * p0).abs() <= 1e-12);
            prop_assert!(((1.0 - pz) * p0 + pz * p1 - marginal).abs() <= 1e-12);
            prop_assert!(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0);
        }
    }
}

#[test]
fn every_comparison_case_holds() {
    let mut r = common::rng(11);
    for case in COMPARE_CASES {
        for _ in 0..200 {
            let (pi, b0, b1) = sample_case(case.id, &mut r);
            let or = or_closed_form(&TheoryPoint::new(0.8, pi, b0, b1).unwrap());
            assert_eq!(b1 < or, case.rr_below_or, "case {} at ({pi}, {b0}, {b1})", case.id);
            assert_eq!((b1 - 1.0).abs() > (or - 1.0).abs(), case.rr_farther, "case {}", case.id);
        }
    }
}

#[test]
fn bisection_recovers_phi() {
    for (pi, b0) in [(0.5, 0.6), (0.4, 0.45), (0.3, 0.65), (0.6, 0.5)] {
        let phi = phi_threshold(pi, b0).unwrap();
        let or = |b1: f64| or_closed_form(&TheoryPoint::new(0.5, pi, b0, b1).unwrap());
        if phi < 1.0 / b0 && (phi - 1.0).abs() > 1e-3 {
            let root = bisect_fixed_point(b0, or).expect("fixed point exists");
            assert!((root - phi).abs() < 1e-9, "pi={pi} b0={b0}: {root} vs {phi}");
        }
    }
    // No admissible fixed point when phi exceeds 1/beta0.
    let or = |b1: f64| or_closed_form(&TheoryPoint::new(0.5, 0.25, 0.2, b1).unwrap());
    assert_eq!(phi_threshold(0.25, 0.2).unwrap(), 12.0);
    assert!(bisect_fixed_point(0.2, or).is_none());
}

#[test]
fn curve_columns_coincide_without_confounding() {
    let grid = interior_grid(0.0, 5.0, 25);
    for p in or_curve(0.8, 0.25, 0.2, &ConfounderDesign::NONE, &grid).unwrap() {
        assert!(rel_err(p.or_unadjusted, p.or_unconfounded) < 1e-12);
        assert!(rel_err(p.or_weighted, p.or_unconfounded) < 1e-12);
    }
}

#[test]
fn region_grid_shape() {
    let grid = region_grid(9);
    assert_eq!(grid.len(), 81);
    for p in grid {
        assert_eq!(p.in_region, p.beta0 < 1.0 - p.pi / (1.0 - p.pi));
    }
}
