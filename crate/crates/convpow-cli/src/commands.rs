//! Subcommand implementations.

use std::f64::consts::PI;

use convpow::assumptions::{analyze, AnalysisConfig, SchemeAnalysis};
use convpow::contour::{ContourParams, ContourSolver, FarField};
use convpow::envelope::{
    far_field_fit, verify_far_field, verify_theorem1, EnvelopeConfig, FarFieldConfig,
};
use convpow::spatial_green::{green_modal_window, green_truncated};
use convpow::spectral::verify_splitting;
use convpow::symbols::eval_f;
use convpow::temporal_green::{power_profile, WindowPolicy};
use convpow::{Complex64, GreenProfile, SchemePair};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{csv_bytes, fmt_f64, Sink};
use crate::report::{AnalyzeJson, EnvelopeJson, FarFieldJson, SplittingJson, VerifyJson};
use crate::scheme::{load_scheme, SchemeFile};
use crate::{
    Cli, CliError, Command, GlobalArgs, SpatialMethod, TemporalMethod, EXIT_FAIL, EXIT_PASS,
};

pub fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    let g = &cli.global;
    let pair = load_scheme(&g.scheme)?;
    let sink = Sink { dir: g.out.clone() };
    match &cli.command {
        Command::Analyze => cmd_analyze(g, &pair, &sink),
        Command::Spectrum { points } => cmd_spectrum(&pair, *points, &sink),
        Command::Spatial {
            z,
            jmin,
            jmax,
            method,
        } => cmd_spatial(&pair, parse_complex(z)?, *jmin, *jmax, *method, &sink),
        Command::Temporal {
            n,
            jmin,
            jmax,
            method,
        } => cmd_temporal(g, pair, *n, (*jmin, *jmax), *method, &sink),
        Command::Verify {
            nfit,
            ntest,
            samples,
            inflation,
            far_n,
        } => cmd_verify(g, pair, *nfit, ntest, *samples, *inflation, *far_n, &sink),
    }
}

fn analysis_config(g: &GlobalArgs) -> AnalysisConfig {
    AnalysisConfig {
        tangency_tol: g.tol_tangency,
        ..Default::default()
    }
}

fn contour_params(g: &GlobalArgs) -> ContourParams {
    ContourParams {
        eta: g.eta,
        epsilon: g.epsilon,
        quad_tol: g.tol_quad,
        ..Default::default()
    }
}

fn window_policy(g: &GlobalArgs, analysis: &SchemeAnalysis) -> WindowPolicy {
    WindowPolicy {
        certify_tol: g.tol_solver,
        ..WindowPolicy::for_analysis(analysis)
    }
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| CliError::usage(format!("invalid complex number '{s}', expected re,im")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
        _ => Err(CliError::usage(format!(
            "invalid complex number '{s}', expected re,im"
        ))),
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(e.into()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn meta<'a>(
    pair: &SchemePair,
    command: &str,
    params: &[(&'a str, String)],
) -> Vec<(&'a str, String)> {
    let mut out = vec![
        ("scheme", pair.name.clone()),
        ("command", command.to_string()),
        ("version", env!("CARGO_PKG_VERSION").to_string()),
    ];
    out.extend(params.iter().cloned());
    out
}

fn cmd_analyze(g: &GlobalArgs, pair: &SchemePair, sink: &Sink) -> Result<u8, CliError> {
    let report = analyze(pair, &analysis_config(g));
    let json = AnalyzeJson::new(SchemeFile::from_pair(pair), &report);
    sink.emit("analyze.json", &json_bytes(&json)?)?;
    Ok(if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn cmd_spectrum(pair: &SchemePair, points: usize, sink: &Sink) -> Result<u8, CliError> {
    if points == 0 {
        return Err(CliError::usage("--points must be positive"));
    }
    let rows = (0..points)
        .into_par_iter()
        .map(|k| {
            let xi = -PI + 2.0 * PI * k as f64 / points as f64;
            let f = eval_f(pair, Complex64::from_polar(1.0, xi))?;
            Ok([xi, f.re, f.im, f.norm()]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect())
        })
        .collect::<convpow::Result<Vec<_>>>()?;
    let bytes = csv_bytes(
        &meta(pair, "spectrum", &[("points", points.to_string())]),
        &["xi", "re_F", "im_F", "abs_F"],
        &rows,
    )?;
    sink.emit("spectrum.csv", &bytes)?;
    Ok(EXIT_PASS)
}

/// `j` followed by `re, im, abs` of each profile at `j`.
fn profile_rows(profiles: &[&GreenProfile], jmin: i64, jmax: i64) -> Vec<Vec<String>> {
    (jmin..=jmax)
        .map(|j| {
            let mut row = vec![j.to_string()];
            for p in profiles {
                let v = p.get(j);
                row.extend([v.re, v.im, v.norm()].iter().map(|&x| fmt_f64(x)));
            }
            row
        })
        .collect()
}

fn cmd_spatial(
    pair: &SchemePair,
    z: Complex64,
    jmin: i64,
    jmax: i64,
    method: SpatialMethod,
    sink: &Sink,
) -> Result<u8, CliError> {
    if jmin > jmax {
        return Err(CliError::usage("--jmin must not exceed --jmax"));
    }
    let half = jmin.unsigned_abs().max(jmax.unsigned_abs()) as usize;
    let modal = match method {
        SpatialMethod::Truncated => None,
        _ => Some(green_modal_window(pair, z, jmin, jmax)?),
    };
    let truncated = match method {
        SpatialMethod::Modal => None,
        _ => Some(green_truncated(pair, z, half)?),
    };
    let (header, profiles): (Vec<&str>, Vec<&GreenProfile>) = match (&modal, &truncated) {
        (Some(m), Some(t)) => (
            vec![
                "j",
                "re_G_modal",
                "im_G_modal",
                "abs_G_modal",
                "re_G_truncated",
                "im_G_truncated",
                "abs_G_truncated",
            ],
            vec![m, t],
        ),
        (Some(m), None) => (vec!["j", "re_G", "im_G", "abs_G"], vec![m]),
        (None, Some(t)) => (vec!["j", "re_G", "im_G", "abs_G"], vec![t]),
        (None, None) => unreachable!("at least one method is selected"),
    };
    let rows = profile_rows(&profiles, jmin, jmax);
    let bytes = csv_bytes(
        &meta(
            pair,
            "spatial",
            &[
                ("z", format!("{}{:+}i", z.re, z.im)),
                ("method", format!("{method:?}").to_lowercase()),
            ],
        ),
        &header,
        &rows,
    )?;
    sink.emit("spatial.csv", &bytes)?;
    Ok(EXIT_PASS)
}

fn far_field_for(pair: &SchemePair) -> convpow::Result<FarField> {
    if pair.is_explicit() {
        Ok(FarField::explicit(pair))
    } else {
        Ok(far_field_fit(pair, &FarFieldConfig::default())?.into())
    }
}

fn cmd_temporal(
    g: &GlobalArgs,
    pair: SchemePair,
    n: usize,
    window: (Option<i64>, Option<i64>),
    method: TemporalMethod,
    sink: &Sink,
) -> Result<u8, CliError> {
    let analysis = SchemeAnalysis::with_config(pair.clone(), &analysis_config(g))?;
    let iterate = power_profile(&pair, n, &window_policy(g, &analysis))?;
    let jmin = window.0.unwrap_or(iterate.j_min);
    let jmax = window.1.unwrap_or(iterate.j_max);
    if jmin > jmax {
        return Err(CliError::usage("--jmin must not exceed --jmax"));
    }
    let contour = match method {
        TemporalMethod::Iterate => None,
        _ => {
            let solver = ContourSolver::new(&analysis, far_field_for(&pair)?, contour_params(g))?;
            Some(solver.profile(n, jmin, jmax)?)
        }
    };
    let (header, profiles): (Vec<&str>, Vec<&GreenProfile>) = match (method, &contour) {
        (TemporalMethod::Iterate, _) => (vec!["j", "re_G", "im_G", "abs_G"], vec![&iterate]),
        (TemporalMethod::Contour, Some(c)) => (vec!["j", "re_G", "im_G", "abs_G"], vec![c]),
        (_, Some(c)) => (
            vec![
                "j",
                "re_G_iterate",
                "im_G_iterate",
                "abs_G_iterate",
                "re_G_contour",
                "im_G_contour",
                "abs_G_contour",
            ],
            vec![&iterate, c],
        ),
        (_, None) => unreachable!("contour values are computed for this method"),
    };
    let rows = profile_rows(&profiles, jmin, jmax);
    let bytes = csv_bytes(
        &meta(
            &pair,
            "temporal",
            &[
                ("n", n.to_string()),
                ("method", format!("{method:?}").to_lowercase()),
            ],
        ),
        &header,
        &rows,
    )?;
    sink.emit("temporal.csv", &bytes)?;
    Ok(EXIT_PASS)
}

fn annulus_samples(seed: u64, count: usize, r_min: f64, r_max: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.random_range(r_min..=r_max);
            let t = rng.random_range(-PI..PI);
            Complex64::from_polar(r, t)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    g: &GlobalArgs,
    pair: SchemePair,
    nfit: usize,
    ntest: &[usize],
    samples: usize,
    inflation: f64,
    far_n: usize,
    sink: &Sink,
) -> Result<u8, CliError> {
    if nfit == 0 || ntest.is_empty() || ntest.contains(&0) {
        return Err(CliError::usage("--nfit and --ntest must be positive"));
    }
    if !(inflation >= 1.0 && inflation.is_finite()) {
        return Err(CliError::usage("--inflation must be at least 1"));
    }
    let analysis = SchemeAnalysis::with_config(pair.clone(), &analysis_config(g))?;
    let z_samples = annulus_samples(g.seed, samples, 1.01, 10.0);
    let splitting = verify_splitting(&pair, &z_samples, g.tol_circle);

    let far = if pair.is_explicit() {
        None
    } else {
        let fit = far_field_fit(&pair, &FarFieldConfig::default())?;
        Some(verify_far_field(&pair, fit, far_n, 10.0)?)
    };
    let cfg = EnvelopeConfig {
        c_cap: g.c_cap,
        inflation,
        ..EnvelopeConfig::for_scheme(&pair, far.as_ref().map(|r| r.fit.reach))
    };
    let theorem = verify_theorem1(&analysis, nfit, ntest, &cfg)?;
    let passed = splitting.passed() && theorem.passed && far.as_ref().is_none_or(|r| r.passed);
    let json = VerifyJson {
        scheme: pair.name.clone(),
        splitting: SplittingJson::new(&splitting, g.seed),
        envelope: EnvelopeJson::new(&theorem, inflation),
        far_field: far.as_ref().map(FarFieldJson::from),
        passed,
    };
    sink.emit("verify.json", &json_bytes(&json)?)?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}
