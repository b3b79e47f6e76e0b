mod common;

use common::c;
use convpow::assumptions::SchemeAnalysis;
use convpow::contour::*;
use convpow::envelope::{far_field_fit, FarFieldConfig};
use convpow::schemes::{implicit_centered, lax_friedrichs};
use convpow::spectral::continue_branch;
use convpow::temporal_green::{power_profile, WindowPolicy};
use convpow::Complex64;

fn lf_solver() -> ContourSolver {
    let an = SchemeAnalysis::new(lax_friedrichs(0.5).unwrap()).unwrap();
    let far = FarField::explicit(&an.pair);
    ContourSolver::new(&an, far, ContourParams::default()).unwrap()
}

fn implicit_solver() -> ContourSolver {
    let an = SchemeAnalysis::new(implicit_centered(0.5).unwrap()).unwrap();
    let fit = far_field_fit(&an.pair, &FarFieldConfig::default()).unwrap();
    ContourSolver::new(&an, fit.into(), ContourParams::default()).unwrap()
}

#[test]
fn lax_friedrichs_point_values() {
    let solver = lf_solver();
    assert!((solver.value(1, 1).unwrap() - c(0.75, 0.0)).norm() < 1e-8);
    assert!((solver.value(2, 4).unwrap() - c(0.421875, 0.0)).norm() < 1e-8);
    assert!(solver.value(7, 4).unwrap().norm() < 1e-10);
}

#[test]
fn drift_selector_values() {
    let an = SchemeAnalysis::new(lax_friedrichs(0.5).unwrap()).unwrap();
    let t = &an.tangencies[0];
    let at_drift = DriftSelector::new(t, 50, 100, 0.05, 0.2);
    assert!(at_drift.zeta.abs() < 1e-12);
    assert!(at_drift.tau_p.abs() < 1e-10);
    let ahead = DriftSelector::new(t, 75, 100, 0.05, 0.2);
    assert!((ahead.zeta - 0.125).abs() < 1e-12);
    assert!((ahead.gamma - 1.125).abs() < 1e-7);
    assert!((ahead.rho - 1.0 / 9.0).abs() < 1e-7);
    assert!((ahead.tau_p - 1.0 / 9.0).abs() < 1e-7);
    let clamped = DriftSelector::new(t, 75, 100, 0.05, 0.05);
    assert_eq!(clamped.tau_p, 0.05);
    let behind = DriftSelector::new(t, 2, 100, 0.05, 0.2);
    assert_eq!(behind.tau_p, -0.025);
}

#[test]
fn far_field_contour_is_a_vertical_line() {
    let an = SchemeAnalysis::new(implicit_centered(0.5).unwrap()).unwrap();
    let rate = 0.7;
    let solver = ContourSolver::new(
        &an,
        FarField { rate, reach: 10.0 },
        ContourParams::default(),
    )
    .unwrap();
    let plan = solver.build(200, 10).unwrap();
    assert!(plan.far_field);
    assert_eq!(plan.pieces.len(), 1);
    match plan.pieces[0] {
        Piece::Segment { from, to } => {
            assert!((from.re - rate * 10.0).abs() < 1e-12);
            assert!((to.re - rate * 10.0).abs() < 1e-12);
            assert!((to.im - from.im - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        }
        _ => panic!("expected a segment"),
    }
}

#[test]
fn contour_is_closed_over_the_strip() {
    let solver = implicit_solver();
    for (j, n) in [(0, 8), (4, 8), (-4, 8), (11, 8), (-13, 8), (3, 1)] {
        let plan = solver.build(j, n).unwrap();
        let start = match plan.pieces.first().unwrap() {
            Piece::Segment { from, .. } => *from,
            Piece::Gamma { .. } => panic!("contour starts on a ball"),
        };
        let end = match plan.pieces.last().unwrap() {
            Piece::Segment { to, .. } => *to,
            Piece::Gamma { .. } => panic!("contour ends on a ball"),
        };
        assert!((start.re - end.re).abs() < 1e-14);
        assert!((end.im - start.im - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}

#[test]
fn contour_matches_iteration_for_small_n() {
    for solver in [lf_solver(), implicit_solver()] {
        let an = SchemeAnalysis::new(solver.pair.clone()).unwrap();
        let policy = WindowPolicy::for_analysis(&an);
        for n in [1usize, 2, 4, 8] {
            let it = power_profile(&solver.pair, n, &policy).unwrap();
            let h = (3 * n as i64).min(it.j_max);
            let ct = solver.profile(n, -h, h).unwrap();
            for j in -h..=h {
                let v = it.get(j);
                assert!(
                    (ct.get(j) - v).norm() <= 1e-6 * (1.0 + v.norm()),
                    "{} n = {n} j = {j}",
                    solver.pair.name
                );
            }
        }
    }
}

#[test]
fn branch_log_has_the_predicted_taylor_coefficients() {
    for pair in [
        lax_friedrichs(0.5).unwrap(),
        implicit_centered(0.5).unwrap(),
    ] {
        let an = SchemeAnalysis::new(pair).unwrap();
        for t in &an.tangencies {
            // varpi(tau) = log kappa_k(z_k e^tau) - i arg kappa_k, expected
            // -tau / alpha + (-1)^{mu+1} beta / alpha^{2 mu + 1} tau^{2 mu} + ...
            let varpi = |tau: f64| -> Complex64 {
                let k = continue_branch(&an.pair, t, t.z * tau.exp()).unwrap();
                (k / t.kappa).ln()
            };
            let diffs = |h: f64| {
                let (p, m) = (varpi(h), varpi(-h));
                ((p - m) / (2.0 * h), (p + m) / (2.0 * h * h))
            };
            // Richardson extrapolation of the central differences.
            let (f1, s1) = diffs(1e-2);
            let (f2, s2) = diffs(5e-3);
            let first = (4.0 * f2 - f1) / 3.0;
            let second = (4.0 * s2 - s1) / 3.0;
            let two_mu = 2 * t.mu as i32;
            let sign = if t.mu % 2 == 1 { 1.0 } else { -1.0 };
            let expected_second = sign * t.beta / t.alpha.powi(two_mu + 1);
            assert!(
                (first - c(-1.0 / t.alpha, 0.0)).norm() < 1e-4,
                "{}",
                an.pair.name
            );
            assert!(
                (second - c(expected_second, 0.0)).norm() < 1e-4,
                "{}",
                an.pair.name
            );
        }
    }
}

#[test]
fn epsilon0_lies_in_the_ball() {
    let an = SchemeAnalysis::new(lax_friedrichs(0.5).unwrap()).unwrap();
    for t in &an.tangencies {
        let e0 = epsilon0(t, 0.05, 0.3).unwrap();
        assert!(e0 > 0.0 && e0 < 0.3);
        let curve = GammaCurve::new(t, e0);
        let y = curve.endpoint(0.05).unwrap();
        assert!(((0.05f64).powi(2) + y * y).sqrt() - 0.3 < 1e-8);
    }
}
