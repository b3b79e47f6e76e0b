//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::time::{Duration, Instant};

use common::{annulus_samples, c};
use convpow::assumptions::{analyze, AnalysisConfig, SchemeAnalysis};
use convpow::contour::{ContourParams, ContourSolver, FarField};
use convpow::envelope::{
    far_field_fit, verify_far_field, verify_theorem1, EnvelopeConfig, FarFieldConfig,
};
use convpow::schemes::{implicit_centered, lax_friedrichs};
use convpow::spatial_green::{
    decay_rates, green_modal_window, green_truncated, recurrence_residual,
};
use convpow::spectral::verify_splitting;
use convpow::temporal_green::{parseval_norm_sq, power_profile, power_sequence, WindowPolicy};
use convpow::{Result, SchemePair};

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn schemes() -> [SchemePair; 2] {
    [
        lax_friedrichs(0.5).unwrap(),
        implicit_centered(0.5).unwrap(),
    ]
}

fn criterion_1() -> Outcome {
    let report = analyze(&lax_friedrichs(0.5)?, &AnalysisConfig::default());
    let t = &report.tangencies;
    let kappas_ok = t.len() == 2
        && t.iter().any(|p| (p.kappa - c(1.0, 0.0)).norm() < 1e-12)
        && t.iter().any(|p| (p.kappa - c(-1.0, 0.0)).norm() < 1e-12);
    let data_ok = t
        .iter()
        .all(|p| (p.alpha - 0.5).abs() < 1e-7 && p.mu == 1 && (p.beta - 0.375).abs() < 1e-6);
    let detail = t
        .iter()
        .map(|p| {
            format!(
                "kappa={:.3e}{:+.3e}i alpha={:.10} mu={} beta={:.10}",
                p.kappa.re, p.kappa.im, p.alpha, p.mu, p.beta
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok((report.passed() && kappas_ok && data_ok, detail))
}

fn criterion_2() -> Outcome {
    let report = analyze(&implicit_centered(0.5)?, &AnalysisConfig::default());
    let t = &report.tangencies;
    let find = |k: f64| t.iter().find(|p| (p.kappa - c(k, 0.0)).norm() < 1e-12);
    let ok = match (find(1.0), find(-1.0)) {
        (Some(a), Some(b)) => {
            t.len() == 2
                && (a.alpha - 0.5).abs() < 1e-7
                && (b.alpha + 0.5).abs() < 1e-7
                && t.iter().all(|p| {
                    (p.z - c(1.0, 0.0)).norm() < 1e-12
                        && (p.beta - 0.125).abs() < 1e-6
                        && p.group == vec![0, 1]
                })
        }
        _ => false,
    };
    let detail = t
        .iter()
        .map(|p| {
            format!(
                "kappa={:+.0} z={:.3} alpha={:+.10} beta={:.10} group={:?}",
                p.kappa.re, p.z.re, p.alpha, p.beta, p.group
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok((report.passed() && report.grouping_ok && ok, detail))
}

fn criterion_3() -> Outcome {
    let samples = annulus_samples(3, 1000, 1.01, 10.0);
    let mut ok = true;
    let mut detail = Vec::new();
    for pair in schemes() {
        let report = verify_splitting(&pair, &samples, 1e-8);
        ok &= report.passed() && report.min_circle_gap > 1e-8;
        detail.push(format!(
            "{}: violations={} min_gap={:.3e}",
            pair.name,
            report.violations.len(),
            report.min_circle_gap
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_4() -> Outcome {
    let mut worst_diff: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for (seed, pair) in schemes().into_iter().enumerate() {
        for z in annulus_samples(40 + seed as u64, 50, 1.05, 10.0) {
            let modal = green_modal_window(&pair, z, -20, 20)?;
            let trunc = green_truncated(&pair, z, 20)?.restrict(-20, 20);
            worst_diff = worst_diff.max(modal.sup_diff(&trunc));
            worst_res = worst_res.max(recurrence_residual(&pair, z, &modal));
            worst_res = worst_res.max(recurrence_residual(&pair, z, &trunc));
        }
    }
    Ok((
        worst_diff < 1e-10 && worst_res < 1e-11,
        format!("sup|modal - truncated|={worst_diff:.3e} residual={worst_res:.3e}"),
    ))
}

fn criterion_5() -> Outcome {
    let g = green_modal_window(&lax_friedrichs(0.5)?, c(2.0, 0.0), -30, 30)?;
    let (left, right) = decay_rates(&g, (2, 15))?;
    let (lf_right, lf_left) = (right.exp(), left.exp());
    let g = green_modal_window(&implicit_centered(0.5)?, c(2.0, 0.0), -30, 30)?;
    let (_, right) = decay_rates(&g, (2, 15))?;
    let imp_right = right.exp();
    let ok = (lf_right - 0.394448725).abs() < 1e-6
        && (lf_left - 1.0 / (4.0 + 13f64.sqrt())).abs() < 1e-6
        && (lf_left - 0.131483).abs() < 1e-6
        && (imp_right - 0.414213562).abs() < 1e-6;
    Ok((
        ok,
        format!("LF right={lf_right:.9} left={lf_left:.9}; implicit right={imp_right:.9}"),
    ))
}

fn criterion_6() -> Outcome {
    let policy = WindowPolicy::default();
    let g = power_profile(&lax_friedrichs(0.5)?, 2, &policy)?;
    let lf_err = [(-2, 0.0625), (0, 0.375), (2, 0.5625)]
        .iter()
        .map(|&(j, v)| (g.get(j) - c(v, 0.0)).norm())
        .fold(0.0, f64::max);
    let g = power_profile(&implicit_centered(0.5)?, 1, &policy)?;
    let imp = g.get(1).re;
    let x = (1.25f64.sqrt() - 1.0) / 0.5;
    let exact = x / 1.25f64.sqrt();
    let ok = lf_err <= 1e-14 && (imp - exact).abs() <= 1e-10 && (imp - 0.211145618).abs() <= 1e-9;
    Ok((
        ok,
        format!("LF max error={lf_err:.3e}; implicit G^1_1={imp:.12}"),
    ))
}

fn criterion_7() -> Outcome {
    let mut mass_err: f64 = 0.0;
    let mut growth = f64::NEG_INFINITY;
    let mut parseval_err: f64 = 0.0;
    for pair in schemes() {
        let an = SchemeAnalysis::new(pair.clone())?;
        let seq = power_sequence(&pair, 256, &WindowPolicy::for_analysis(&an))?;
        for (n, g) in seq.iter().enumerate() {
            mass_err = mass_err.max((g.sum() - c(1.0, 0.0)).norm());
            if n > 0 {
                growth = growth.max(g.l2_norm() - seq[n - 1].l2_norm());
            }
            if n <= 64 {
                let norm = g.l2_norm();
                parseval_err =
                    parseval_err.max((norm * norm - parseval_norm_sq(&pair, n, 1e-13)?).abs());
            }
        }
    }
    Ok((
        mass_err <= 1e-10 && growth <= 1e-12 && parseval_err <= 1e-8,
        format!("mass error={mass_err:.3e} max l2 growth={growth:.3e} parseval error={parseval_err:.3e}"),
    ))
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = (String::new(), 0, 0);
    for pair in schemes() {
        let an = SchemeAnalysis::new(pair.clone())?;
        let far: FarField = if pair.is_explicit() {
            FarField::explicit(&pair)
        } else {
            far_field_fit(&pair, &FarFieldConfig::default())?.into()
        };
        let solver = ContourSolver::new(&an, far, ContourParams::default())?;
        let policy = WindowPolicy::for_analysis(&an);
        for n in [1usize, 2, 4, 8, 16, 32] {
            let it = power_profile(&pair, n, &policy)?;
            let ct = solver.profile(n, it.j_min, it.j_max)?;
            for (j, v) in it.iter() {
                let err = (ct.get(j) - v).norm() / (1.0 + v.norm());
                if err > worst {
                    worst = err;
                    at = (pair.name.clone(), n, j);
                }
            }
        }
    }
    Ok((
        worst <= 1e-6,
        format!(
            "max |contour - iterate| / (1 + |value|)={worst:.3e} at {} n={} j={}",
            at.0, at.1, at.2
        ),
    ))
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for pair in schemes() {
        let an = SchemeAnalysis::new(pair.clone())?;
        let reach = if pair.is_explicit() {
            None
        } else {
            Some(far_field_fit(&pair, &FarFieldConfig::default())?.reach)
        };
        let cfg = EnvelopeConfig::for_scheme(&pair, reach);
        let report = verify_theorem1(&an, 32, &[128, 256, 512], &cfg)?;
        ok &= report.passed && report.fit.rate > 0.0;
        let ratios = report
            .tests
            .iter()
            .map(|t| format!("n={} ratio={:.3} ({})", t.n, t.max_ratio, t.sector))
            .collect::<Vec<_>>()
            .join(", ");
        detail.push(format!(
            "{}: C={:.4} c={:.4} [{ratios}]",
            pair.name, report.fit.constant, report.fit.rate
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_10() -> Outcome {
    let pair = implicit_centered(0.5)?;
    let fit = far_field_fit(&pair, &FarFieldConfig::default())?;
    let report = verify_far_field(&pair, fit, 64, 10.0)?;
    Ok((
        report.passed,
        format!(
            "C={:.4} c={:.4} L={:.3} max ratio={:.3e} at n={} j={}",
            fit.constant, fit.rate, fit.reach, report.max_ratio, report.worst.0, report.worst.1
        ),
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("1 LF analysis", criterion_1, Duration::from_secs(1)),
        ("2 implicit analysis", criterion_2, Duration::from_secs(1)),
        ("3 spectral splitting", criterion_3, Duration::from_secs(5)),
        (
            "4 spatial oracle equivalence",
            criterion_4,
            Duration::from_secs(10),
        ),
        ("5 spatial decay data", criterion_5, Duration::from_secs(60)),
        ("6 temporal exactness", criterion_6, Duration::from_secs(60)),
        (
            "7 conservation and contraction",
            criterion_7,
            Duration::from_secs(30),
        ),
        (
            "8 contour/iteration agreement",
            criterion_8,
            Duration::from_secs(120),
        ),
        (
            "9 envelope uniformity",
            criterion_9,
            Duration::from_secs(120),
        ),
        (
            "10 implicit far field",
            criterion_10,
            Duration::from_secs(60),
        ),
    ];
    let mut failed = Vec::new();
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed <= budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "{} criterion {name}: {detail} [{:.3} s, budget {} s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
