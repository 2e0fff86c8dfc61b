use std::f64::consts::E;

use regloss::error::Error;
use regloss::field::{cube_distance_to_complement, Grid};
use regloss::mixing::{MixerConstants, OrderConstant};
use regloss::patchwork::{
    blowup_time, evaluate_condition, evaluate_truncated_solution, hs_lower_bound_partial_sums,
    hs_lower_bound_series, make_piece, place_cubes, theorem1_schedule, theorem2_schedule,
    BasePair, ConditionId, ConditionParams, ConstructionParams, Schedule,
};
use regloss::series::{ExpPolySeries, Verdict};
use regloss::sobolev::{hs_norm, rescaled_norm, sphere_area};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn constants() -> MixerConstants {
    MixerConstants::new(
        1.0,
        0.8,
        0.16,
        vec![OrderConstant {
            order: 0.5,
            value: 0.05,
        }],
    )
    .unwrap()
}

#[test]
fn theorem1_schedule_values() {
    let sch = theorem1_schedule();
    let (l, t, g) = sch.at(5);
    assert!(rel(l, (-5f64).exp()) < 1e-14);
    assert!(rel(t, 1.0 / 125.0) < 1e-14);
    assert!(rel(g, (-25f64).exp()) < 1e-14);
    let (l, t, g) = sch.at(1);
    assert!(rel(l, 1.0 / E) < 1e-14 && t == 1.0 && rel(g, 1.0 / E) < 1e-14);
    let ratios: Vec<f64> = (1..=20).map(|n| sch.at(n).0 / sch.at(n).1).collect();
    let (arg, max) = ratios
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, r)| if *r > acc.1 { (i + 1, *r) } else { acc });
    assert_eq!(arg, 3);
    assert!(rel(max, 27.0 * (-3f64).exp()) < 1e-14);
}

#[test]
fn theorem2_parameters() {
    let p = ConstructionParams::new(3, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(p.beta, 0.5);
    assert!(rel(p.mu_bar, 2.0 / 3.0) < 1e-15);
    assert_eq!(p.alpha, 4.0);
    assert_eq!(p.blowup_threshold(1.0), 0.8);
    let near_one = ConstructionParams::new(3, 1.0 + 1e-9, 2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    assert!(near_one.mu_bar < 1e-8);
    assert!(matches!(
        ConstructionParams::new(3, 2.0, 3.0, 1.0, 1.0, 1.0, 1.0),
        Err(Error::LipschitzEmbedding { .. })
    ));
    assert!(p.with_alpha(1.9, 1.0).is_err());
    let sch = theorem2_schedule(&p, 1.0, 1.0).unwrap();
    let (l, t, g) = sch.at(2);
    assert!(rel(l, (-8f64).exp()) < 1e-14);
    assert_eq!(t, 0.5);
    assert!(rel(g, 0.25 * (2.0f64 * 4.0 * 0.5).exp()) < 1e-14);
}

#[test]
fn piece_recipe() {
    let sch = theorem1_schedule();
    assert!(matches!(make_piece(&sch, 0), Err(Error::Index(_))));
    let p = make_piece(&sch, 3).unwrap();
    assert!(rel(p.lambda, 0.049787068367863944) < 1e-15);
    assert!(rel(p.tau, 1.0 / 27.0) < 1e-15);
    assert!(rel(p.gamma, 0.00012340980408667956) < 1e-15);
    assert!(rel(p.center[0], 0.24853008711224073) < 1e-14);
    assert_eq!(p.center[1], 0.0);
    assert!(rel(p.velocity_sup(2.0), 2.0 * p.lambda / p.tau) < 1e-15);
    assert!(rel(p.datum_sup(3.0), 3.0 * p.gamma) < 1e-15);
    for n in 1..=10 {
        let p = make_piece(&sch, n).unwrap();
        let dist = cube_distance_to_complement(&p.support_cube(), &p.cube()).unwrap();
        assert!(dist >= p.lambda * (1.0 - 1e-12));
    }
}

#[test]
fn cube_placement() {
    let sch = theorem1_schedule();
    let cubes = place_cubes(&sch, 10).unwrap();
    let container = sch.container().unwrap();
    for i in 0..cubes.len() {
        assert!(container.contains_cube(&cubes[i]));
        for j in i + 1..cubes.len() {
            assert!(cubes[i].distance_to(&cubes[j]) > 0.0, "{i} {j}");
        }
    }
    let far = place_cubes(&sch, 40).unwrap();
    assert!(far[39].center[0] < 1e-15);
    assert_eq!(place_cubes(&sch, 1).unwrap().len(), 1);
    let harmonic = Schedule::new(
        ExpPolySeries::power(1.0, -1.0),
        ExpPolySeries::power(1.0, -1.0),
        ExpPolySeries::power(1.0, 0.0),
        vec![0.0, 0.0],
    )
    .unwrap();
    assert!(matches!(place_cubes(&harmonic, 3), Err(Error::InfeasiblePlacement(_))));
}

#[test]
fn condition_examples() {
    let sch = theorem1_schedule();
    let p = ConditionParams::new(2);
    for (s, t) in [(0.1, 0.01), (0.5, 0.1), (0.9, 1.0)] {
        let cert = evaluate_condition(&sch, ConditionId::D, &p.s(s).t(t).c(1.0)).unwrap();
        assert_eq!(cert.verdict, Verdict::Divergent);
        let q = &cert.series.q;
        assert_eq!(q.len(), 3);
        assert!(rel(q[0], -(2.0 - 2.0 * s)) < 1e-14);
        assert_eq!(q[1], -2.0);
        assert!(rel(q[2], 2.0 * s * t) < 1e-14);
    }
    let at_zero = evaluate_condition(&sch, ConditionId::D, &p.s(0.5).t(0.0).c(1.0)).unwrap();
    assert_eq!(at_zero.verdict, Verdict::Convergent);
    let bhat = evaluate_condition(&sch, ConditionId::BHat, &p.p(2.0)).unwrap();
    assert_eq!(bhat.verdict, Verdict::Convergent);
    assert!(bhat.holds());
    assert!(evaluate_condition(&sch, ConditionId::D, &p).is_err());
}

#[test]
fn unsupported_tau_is_rejected() {
    let sch = Schedule::new(
        ExpPolySeries::geometric(-1.0),
        ExpPolySeries::power(1.0, -1.5),
        ExpPolySeries::power(1.0, 0.0),
        vec![0.0, 0.0],
    )
    .unwrap();
    let p = ConditionParams::new(2).s(0.5).t(0.1).c(1.0);
    assert!(matches!(
        evaluate_condition(&sch, ConditionId::D, &p),
        Err(Error::UnsupportedSchedule(_))
    ));
}

#[test]
fn blowup_time_examples() {
    assert_eq!(blowup_time(1.0, 1.0, 2.0, 1.0, 1.0).unwrap(), 0.0);
    assert_eq!(blowup_time(0.5, 1.0, 2.0, 1.0, 1.0).unwrap(), 2.0);
    assert_eq!(blowup_time(1.5, 1.0, 2.0, 1.0, 1.0).unwrap(), 0.0);
    assert!(blowup_time(0.0, 1.0, 2.0, 1.0, 1.0).is_err());
    assert!(blowup_time(0.5, 1.0, 2.0, 0.0, 1.0).is_err());
}

#[test]
fn blowup_criteria_agree() {
    let (b, c) = (1.0, 1.0);
    let base = ConstructionParams::new(3, 2.0, 2.0, 1.0, 1.0, b, c).unwrap();
    let near = base.with_alpha((1.0 + 1e-9) * base.alpha_lower_bound(b), b).unwrap();
    for i in 1..=100 {
        let s = i as f64 / 101.0;
        let early = blowup_time(s, 1.0, base.alpha, c, 1.0).unwrap() < 1.0;
        assert_eq!(early, s > base.blowup_threshold(c), "s = {s}");
        let early = blowup_time(s, 1.0, near.alpha, c, 1.0).unwrap() < 1.0;
        assert_eq!(early, s > near.mu_bar, "s = {s}");
    }
}

#[test]
fn lower_bound_partial_sums() {
    let sch = theorem1_schedule();
    let k = constants();
    let at_zero = hs_lower_bound_partial_sums(&sch, 0.5, 0.0, 60, &k, 2).unwrap();
    assert!(rel(at_zero[59], at_zero[29]) < 1e-15);
    let grow = hs_lower_bound_partial_sums(&sch, 0.5, 0.1, 40, &k, 2).unwrap();
    assert!(grow.windows(2).all(|w| w[1] >= w[0]));
    assert!(grow.iter().any(|v| *v > 1e6));
    let (l, t, g) = sch.at(1);
    let cs = k.c_s(0.5).unwrap();
    let first = g * g * l * (cs * cs * (2.0 * 0.5 * 0.8 * 0.1 / t).exp() - sphere_area(2) * 0.16 * 0.16 / 0.5);
    assert!(rel(grow[0], first) < 1e-12);
    assert_eq!(hs_lower_bound_series(&sch, 0.5, 0.1, 40, &k, 2).unwrap(), grow[39]);
    assert!(hs_lower_bound_partial_sums(&sch, 1.0, 0.1, 5, &k, 2).is_err());
    assert!(hs_lower_bound_partial_sums(&sch, 0.5, 0.1, 0, &k, 2).is_err());
}

#[test]
fn piece_norm_follows_scaling_law() {
    let base = BasePair::default();
    let (flow, datum) = base.build().unwrap();
    let sch = Schedule::new(
        ExpPolySeries::geometric(-(2f64.ln())),
        ExpPolySeries::power(1.0, -3.0),
        ExpPolySeries::new(1.0, 0.0, vec![0.0, -1.0], 1),
        vec![0.0, 0.0],
    )
    .unwrap();
    let piece = make_piece(&sch, 1).unwrap();
    assert_eq!(piece.lambda, 0.5);
    let window = piece.cube();
    let grid = Grid::new(2, 512, window.side).unwrap();
    let sol = evaluate_truncated_solution(&sch, &flow, &datum, 1, 0.0, &window, &grid).unwrap();
    assert_eq!(sol.pieces.len(), 1);
    for sigma in [0.5, 1.0] {
        let predicted = piece.gamma * rescaled_norm(&hs_norm(&datum, sigma), piece.lambda, 2).unwrap().value;
        let measured = hs_norm(&sol.total, sigma).value;
        assert!(rel(measured, predicted) < 1e-3, "sigma {sigma}: {measured} vs {predicted}");
    }
}

#[test]
fn truncated_solution_properties() {
    let base = BasePair::default();
    let (flow, datum) = base.build().unwrap();
    let sch = theorem1_schedule();
    let window = sch.container().unwrap();
    let grid = Grid::new(2, 256, window.side).unwrap();
    let sol = evaluate_truncated_solution(&sch, &flow, &datum, 2, 0.0, &window, &grid).unwrap();
    let sigma = 0.5;
    let triangle: f64 = sol
        .pieces
        .iter()
        .map(|p| p.spec.gamma * rescaled_norm(&hs_norm(&datum, sigma), p.spec.lambda, 2).unwrap().value)
        .sum();
    assert!(hs_norm(&sol.total, sigma).value <= triangle * (1.0 + 1e-3));
    let gmax = sol.pieces.iter().map(|p| p.spec.gamma).fold(0.0, f64::max);
    assert!(sol.total.linf_norm() <= gmax * datum.linf_norm() * (1.0 + 1e-9));
    let prod = sol.pieces[0].field.product(&sol.pieces[1].field).unwrap();
    assert!(prod.values().iter().all(|v| *v == 0.0));
    let coarse = Grid::new(2, 64, window.side).unwrap();
    assert!(matches!(
        evaluate_truncated_solution(&sch, &flow, &datum, 5, 0.0, &window, &coarse),
        Err(Error::Resolution(_))
    ));
}

#[test]
fn single_piece_on_its_own_cube() {
    let base = BasePair::default();
    let (flow, datum) = base.build().unwrap();
    let sch = theorem1_schedule();
    let q1 = make_piece(&sch, 1).unwrap().cube();
    let grid = Grid::new(2, 128, q1.side).unwrap();
    let sol = evaluate_truncated_solution(&sch, &flow, &datum, 1, 0.5, &window_of(&q1), &grid).unwrap();
    assert_eq!(sol.pieces.len(), 1);
    assert_eq!(sol.total.values(), sol.pieces[0].field.values());
}

fn window_of(c: &regloss::field::Cube) -> regloss::field::Cube {
    c.clone()
}
