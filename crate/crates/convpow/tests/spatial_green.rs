mod common;

use common::{annulus_samples, c};
use convpow::assumptions::SchemeAnalysis;
use convpow::schemes::{implicit_centered, lax_friedrichs};
use convpow::spatial_green::*;
use convpow::symbols::SchemePair;
use convpow::{Complex64, Error, GreenProfile, ProfileMeta};
use nalgebra::{DMatrix, DVector};

fn schemes() -> Vec<SchemePair> {
    vec![
        lax_friedrichs(0.5).unwrap(),
        implicit_centered(0.5).unwrap(),
    ]
}

#[test]
fn truncated_tails_follow_dispersion_roots() {
    let lf = lax_friedrichs(0.5).unwrap();
    let g = green_truncated(&lf, c(2.0, 0.0), 40).unwrap();
    let s13 = 13f64.sqrt();
    for j in 1..=15 {
        let ratio = (g.get(j + 1) / g.get(j)).re;
        assert!((ratio - (4.0 - s13)).abs() < 1e-9, "j = {j}");
    }
    for j in -15..=-1 {
        let ratio = (g.get(j - 1) / g.get(j)).re;
        assert!((ratio - 1.0 / (4.0 + s13)).abs() < 1e-9, "j = {j}");
    }
}

#[test]
fn large_z_is_dominated_by_the_neumann_leading_term() {
    let z = c(1e12, 0.0);
    for pair in schemes() {
        let g = green_truncated(&pair, z, 40).unwrap();
        assert!((g.get(0) * z - c(1.0, 0.0)).norm() < 1e-10, "{}", pair.name);
        for j in [-2, -1, 1, 2] {
            assert!(g.get(j).norm() < 1e-23, "{} j = {j}", pair.name);
        }
    }
}

#[test]
fn modal_matches_truncated_at_two() {
    for pair in schemes() {
        let z = c(2.0, 0.0);
        let t = green_truncated(&pair, z, 40).unwrap().restrict(-20, 20);
        let m = green_modal_window(&pair, z, -20, 20).unwrap();
        assert!(m.sup_diff(&t) < 1e-10, "{}", pair.name);
    }
}

#[test]
fn modal_matches_truncated_on_random_samples() {
    for (seed, pair) in [
        (11, lax_friedrichs(0.5).unwrap()),
        (12, implicit_centered(0.5).unwrap()),
    ] {
        for z in annulus_samples(seed, 50, 1.05, 10.0) {
            let t = green_truncated(&pair, z, 40).unwrap();
            let m = green_modal_window(&pair, z, t.j_min, t.j_max).unwrap();
            assert!(m.restrict(-20, 20).sup_diff(&t.restrict(-20, 20)) < 1e-10);
            assert!(recurrence_residual(&pair, z, &t.restrict(-30, 30)) < 1e-11);
            assert!(recurrence_residual(&pair, z, &m.restrict(-30, 30)) < 1e-11);
        }
    }
}

#[test]
fn modal_window_covers_values_above_floor() {
    let imp = implicit_centered(0.5).unwrap();
    let g = green_modal(&imp, c(2.0, 0.0)).unwrap();
    assert_eq!(g.meta.source, "modal");
    assert!(g.get(g.j_min).norm() < 1e-15 && g.get(g.j_max).norm() < 1e-15);
    assert!(g.j_max > 20 && g.j_min < -20);
}

#[test]
fn explicit_tail_is_a_single_mode() {
    let lf = lax_friedrichs(0.5).unwrap();
    let z = c(1.5, 0.5);
    let m = ModalGreen::by_modulus(&lf, z).unwrap();
    let kappa = m.stable_roots()[0];
    for j in 2..12 {
        let ratio = m.value(j + 1) / m.value(j);
        assert!((ratio - kappa).norm() < 1e-13 * kappa.norm());
    }
}

#[test]
fn decay_rates_from_stable_roots() {
    let lf = lax_friedrichs(0.5).unwrap();
    let g = green_modal_window(&lf, c(2.0, 0.0), -30, 30).unwrap();
    let (left, right) = decay_rates(&g, (2, 15)).unwrap();
    assert!((right - (4.0 - 13f64.sqrt()).ln()).abs() < 1e-6);
    assert!((left + (4.0 + 13f64.sqrt()).ln()).abs() < 1e-6);

    let imp = implicit_centered(0.5).unwrap();
    let g = green_modal_window(&imp, c(2.0, 0.0), -30, 30).unwrap();
    let (_, right) = decay_rates(&g, (2, 15)).unwrap();
    assert!((right + 0.881374).abs() < 1e-6);
}

#[test]
fn decay_rates_on_constructed_profiles() {
    let rho: f64 = 0.7;
    let meta = ProfileMeta {
        source: "constructed".into(),
        z: None,
        n: None,
        scheme: "geometric".into(),
    };
    let values: Vec<Complex64> = (-20..=20).map(|j: i32| c(rho.powi(j.abs()), 0.0)).collect();
    let g = GreenProfile::new(-20, values, meta.clone());
    let (left, right) = decay_rates(&g, (1, 20)).unwrap();
    assert!((left - rho.ln()).abs() < 1e-12 && (right - rho.ln()).abs() < 1e-12);
    assert!(matches!(
        decay_rates(&g, (1, 5)),
        Err(Error::WindowTooShort { .. })
    ));

    let tiny: Vec<Complex64> = (-20..=20)
        .map(|j: i32| c(1e-3f64.powi(j.abs()), 0.0))
        .collect();
    let g = GreenProfile::new(-20, tiny, meta);
    assert!(matches!(
        decay_rates(&g, (1, 10)),
        Err(Error::Underflow { .. })
    ));
}

/// Coefficients of `W_j = (G(j+p-1), ..., G(j-r))` in the eigenbasis
/// `(kappa^{p+r-1}, ..., 1)` of the companion matrix.
fn mode_coefficients(
    g: &GreenProfile,
    roots: &[Complex64],
    j: i64,
    r: i64,
    p: i64,
) -> Vec<Complex64> {
    let size = (p + r) as usize;
    let basis = DMatrix::from_fn(size, size, |row, col| {
        roots[col].powi((size - 1 - row) as i32)
    });
    let w = DVector::from_fn(size, |row, _| g.get(j + p - 1 - row as i64));
    let coef = basis.lu().solve(&w).expect("distinct roots");
    coef.iter().copied().collect()
}

#[test]
fn structural_zeros_of_the_augmented_state() {
    for (seed, pair) in [
        (13, lax_friedrichs(0.5).unwrap()),
        (14, implicit_centered(0.5).unwrap()),
    ] {
        let (r, p) = (pair.r() as i64, pair.p() as i64);
        for z in annulus_samples(seed, 10, 1.2, 5.0) {
            let m = ModalGreen::by_modulus(&pair, z).unwrap();
            let stable = m.stable_roots();
            let unstable = m.unstable_roots();
            let roots: Vec<Complex64> = stable.iter().chain(&unstable).copied().collect();
            let g = green_truncated(&pair, z, 40).unwrap();
            let scale = g.sup_norm();
            for j in r + 1..r + 10 {
                let coef = mode_coefficients(&g, &roots, j, r, p);
                for (k, v) in coef.iter().enumerate().skip(stable.len()) {
                    let size = unstable[k - stable.len()].powi((j - r) as i32).norm();
                    assert!(
                        v.norm() * size < 1e-12 * scale,
                        "{} unstable j = {j}",
                        pair.name
                    );
                }
            }
            for j in -p - 10..=-p {
                let coef = mode_coefficients(&g, &roots, j, r, p);
                for (k, v) in coef.iter().enumerate().take(stable.len()) {
                    let size = stable[k].powi((j - r) as i32).norm();
                    assert!(
                        v.norm() * size < 1e-12 * scale,
                        "{} stable j = {j}",
                        pair.name
                    );
                }
            }
        }
    }
}

fn apply_explicit(pair: &SchemePair, u: &[Complex64]) -> Vec<Complex64> {
    let (r, p) = (pair.r() as i64, pair.p() as i64);
    let len = u.len() as i64;
    (0..len)
        .map(|i| {
            (-r..=p)
                .filter(|l| (0..len).contains(&(i + l)))
                .map(|l| pair.q0().coeff(l) * u[(i + l) as usize])
                .sum::<Complex64>()
        })
        .collect()
}

#[test]
fn neumann_series_oracle() {
    let lf = lax_friedrichs(0.5).unwrap();
    let norm_l = lf.q0().coeffs().iter().map(|a| a.norm()).sum::<f64>();
    for z in [c(4.0, 0.0), c(0.0, -5.0), c(-3.0, 3.0), c(7.0, 1.0)] {
        let ratio = norm_l / z.norm();
        let terms = ((1e-12f64).ln() / ratio.ln()).ceil() as usize;
        let half = (terms as i64 + 2).max(25);
        let mut power = vec![c(0.0, 0.0); (2 * half + 1) as usize];
        power[half as usize] = c(1.0, 0.0);
        let mut sum = vec![c(0.0, 0.0); power.len()];
        let mut zpow = z.inv();
        for _ in 0..=terms {
            for (s, v) in sum.iter_mut().zip(&power) {
                *s += v * zpow;
            }
            power = apply_explicit(&lf, &power);
            zpow /= z;
        }
        let g = green_truncated(&lf, z, 60).unwrap();
        for j in -20..=20 {
            let neumann = sum[(j + half) as usize];
            assert!((neumann - g.get(j)).norm() < 1e-10, "z = {z}, j = {j}");
        }
    }
}

#[test]
fn circle_roots_are_rejected_by_the_modal_route() {
    let lf = lax_friedrichs(0.5).unwrap();
    assert!(matches!(
        ModalGreen::by_modulus(&lf, c(1.0, 0.0)),
        Err(Error::SplitMismatch { circle: 1, .. })
    ));
}

#[test]
fn spatial_bounds_hold_for_both_schemes() {
    for pair in schemes() {
        let explicit = pair.is_explicit();
        let an = SchemeAnalysis::new(pair).unwrap();
        let report = verify_spatial_bounds(&an, &SpatialBoundsConfig::default()).unwrap();
        assert!(report.passed(), "{}: {report:?}", an.pair.name);
        assert!(report.far_rate > 0.0);
        assert!(report.largest_tracking_eps.is_some());
        if explicit {
            assert!(report.infinity_rates.is_none());
            assert!(report.tracking.iter().all(|t| t.opposite_rate.is_some()));
        } else {
            let (reference, far) = report.infinity_rates.unwrap();
            assert!(far >= reference / 2.0);
            assert!(report.tracking.iter().all(|t| t.opposite_rate.is_none()));
        }
    }
}
