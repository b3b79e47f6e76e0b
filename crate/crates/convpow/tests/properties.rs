mod common;

use common::c;
use convpow::assumptions::SchemeAnalysis;
use convpow::schemes::{implicit_centered, lax_friedrichs};
use convpow::spatial_green::{green_modal, green_truncated, recurrence_residual};
use convpow::spectral::{dispersion_poly, dispersion_roots};
use convpow::symbols::{eval_f, eval_q_symbol, rational_kernel, winding_number};
use convpow::temporal_green::{power_profile, WindowPolicy};
use convpow::{Complex64, ConvolutionOperator, SchemePair};
use proptest::prelude::*;
use std::f64::consts::PI;

fn unit(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

fn annulus_point(rho: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(rho, theta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symbol_ratio(
        a in prop::collection::vec(-1.0f64..1.0, 5),
        b in prop::collection::vec(-0.3f64..0.3, 3),
        theta in -PI..PI,
    ) {
        let q0 = ConvolutionOperator::from_real(2, 2, &a).unwrap();
        let q1 = ConvolutionOperator::from_real(1, 1, &[b[0], 1.0 + b[1], b[2]]).unwrap();
        let pair = SchemePair::new("random", q0.clone(), q1.clone()).unwrap();
        let k = unit(theta);
        let expected = eval_q_symbol(&q0, k).unwrap() / eval_q_symbol(&q1, k).unwrap();
        let got = eval_f(&pair, k).unwrap();
        prop_assert!((got - expected).norm() <= 1e-14 * (1.0 + expected.norm()));
    }

    #[test]
    fn winding_stable_under_doubling(a in prop::collection::vec(-1.0f64..1.0, 5)) {
        let op = ConvolutionOperator::from_real(2, 2, &a).unwrap();
        if let Ok(w) = winding_number(&op, 512) {
            prop_assert_eq!(winding_number(&op, 1024).unwrap(), w);
        }
    }

    #[test]
    fn kernel_sums_to_symbol_at_one(lambda in 0.1f64..2.0) {
        let pair = implicit_centered(lambda).unwrap();
        let kernel = rational_kernel(&pair, 1e-13, 1 << 14).unwrap();
        let f1 = eval_f(&pair, c(1.0, 0.0)).unwrap();
        prop_assert!((kernel.sum() - f1).norm() < 1e-12);
    }

    #[test]
    fn vieta_product(lambda in 0.05f64..0.95, rho in 1.01f64..10.0, theta in -PI..PI) {
        for pair in [lax_friedrichs(lambda).unwrap(), implicit_centered(lambda).unwrap()] {
            let z = annulus_point(rho, theta);
            let coeffs = dispersion_poly(&pair, z).unwrap();
            let split = dispersion_roots(&pair, z, 1e-8).unwrap();
            let product = split.roots.iter().fold(c(1.0, 0.0), |acc, r| acc * r.value);
            let lhs = product * coeffs[coeffs.len() - 1] / coeffs[0];
            let sign = if (pair.p() + pair.r()) % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((lhs - c(sign, 0.0)).norm() < 1e-10);
            prop_assert_eq!(split.counts(), (1, 0, 1));
        }
    }

    #[test]
    fn modal_matches_truncated(lambda in 0.05f64..0.95, rho in 1.05f64..10.0, theta in -PI..PI) {
        for pair in [lax_friedrichs(lambda).unwrap(), implicit_centered(lambda).unwrap()] {
            let z = annulus_point(rho, theta);
            let modal = green_modal(&pair, z).unwrap();
            let trunc = green_truncated(&pair, z, 40).unwrap();
            prop_assert!(modal.restrict(-20, 20).sup_diff(&trunc.restrict(-20, 20)) < 1e-10);
            prop_assert!(recurrence_residual(&pair, z, &trunc.restrict(-20, 20)) < 1e-11);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lax_friedrichs_closed_forms(lambda in 0.05f64..0.95) {
        let an = SchemeAnalysis::new(lax_friedrichs(lambda).unwrap()).unwrap();
        prop_assert_eq!(an.tangencies.len(), 2);
        for t in &an.tangencies {
            prop_assert_eq!(t.mu, 1);
            prop_assert!((t.alpha - lambda).abs() < 1e-7);
            prop_assert!((t.beta - (1.0 - lambda * lambda) / 2.0).abs() < 1e-7);
        }
    }

    #[test]
    fn implicit_closed_forms(lambda in 0.1f64..3.0) {
        let an = SchemeAnalysis::new(implicit_centered(lambda).unwrap()).unwrap();
        prop_assert_eq!(an.tangencies.len(), 2);
        // Conjugate tangencies share (|alpha|, mu, beta).
        let (a, b) = (&an.tangencies[0], &an.tangencies[1]);
        prop_assert!((a.beta - b.beta).abs() < 1e-10);
        prop_assert!((a.alpha + b.alpha).abs() < 1e-10);
        for t in &an.tangencies {
            prop_assert!((t.alpha.abs() - lambda).abs() < 1e-7);
            prop_assert!((t.beta - lambda * lambda / 2.0).abs() < 1e-7);
        }
    }

    #[test]
    fn mass_is_conserved(lambda in 0.05f64..0.95, n in 1usize..80) {
        for pair in [lax_friedrichs(lambda).unwrap(), implicit_centered(lambda).unwrap()] {
            let an = SchemeAnalysis::new(pair.clone()).unwrap();
            let g = power_profile(&pair, n, &WindowPolicy::for_analysis(&an)).unwrap();
            prop_assert!((g.sum() - c(1.0, 0.0)).norm() < 1e-10);
            prop_assert!(g.l2_norm() <= 1.0 + 1e-12);
        }
    }
}
