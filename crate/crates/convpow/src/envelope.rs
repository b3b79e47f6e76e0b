//! Generalized Gaussian envelopes for `G^n` and the far-field bound of
//! implicit schemes.
//!
//! The envelope is
//! `E_c(j, n) = sum_k n^{-1/(2 mu_k)} exp(-c (|j - alpha_k n| / n^{1/(2 mu_k)})^{2 mu_k / (2 mu_k - 1)})`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::assumptions::{SchemeAnalysis, TangencyPoint};
use crate::contour::FarField;
use crate::error::{Error, Result};
use crate::profile::GreenProfile;
use crate::spatial_green::ModalGreen;
use crate::symbols::SchemePair;
use crate::temporal_green::{power_profile, tilted_power_profile, WindowPolicy};

/// `log E_c(j, n)`.
pub fn log_envelope(tangencies: &[TangencyPoint], c: f64, j: i64, n: usize) -> f64 {
    let n_f = n as f64;
    let terms: Vec<f64> = tangencies
        .iter()
        .map(|t| {
            let two_mu = 2.0 * t.mu as f64;
            let width = n_f.powf(1.0 / two_mu);
            let x = (j as f64 - t.alpha * n_f).abs() / width;
            -n_f.ln() / two_mu - c * x.powf(two_mu / (two_mu - 1.0))
        })
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Options for [`fit_envelope`] and [`verify_theorem1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConfig {
    pub c_min: f64,
    pub c_max: f64,
    /// Ratio between consecutive candidate rates.
    pub ratio: f64,
    pub c_cap: f64,
    /// Points below `floor * max |G^n|` are not tested.
    pub floor: f64,
    /// Only `|j| <= reach * n` is tested when set.
    pub reach: Option<f64>,
    /// Inflation of `C` when testing larger `n`.
    pub inflation: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig {
            c_min: 1e-3,
            c_max: 10.0,
            ratio: 2f64.powf(0.25),
            c_cap: 1e3,
            floor: 0.0,
            reach: None,
            inflation: 1.1,
        }
    }
}

impl EnvelopeConfig {
    /// Floor and reach suited to the scheme: none for explicit schemes with
    /// nonnegative real coefficients, otherwise a `1e-13` resolution floor and
    /// the far-field reach.
    pub fn for_scheme(pair: &SchemePair, far_reach: Option<f64>) -> Self {
        let positive = pair.is_explicit()
            && pair
                .q0()
                .coeffs()
                .iter()
                .all(|a| a.im == 0.0 && a.re >= 0.0);
        EnvelopeConfig {
            floor: if positive { 0.0 } else { 1e-13 },
            reach: if pair.is_explicit() { None } else { far_reach },
            ..Default::default()
        }
    }
}

/// Smallest constant for one profile at rate `c`, with the worst offset.
fn profile_constant(
    profile: &GreenProfile,
    tangencies: &[TangencyPoint],
    c: f64,
    cfg: &EnvelopeConfig,
) -> (f64, i64) {
    let n = profile.meta.n.unwrap_or(1).max(1);
    let cutoff = cfg.floor * profile.sup_norm();
    let mut best = (0.0, 0);
    for (j, v) in profile.iter() {
        let m = v.norm();
        if m == 0.0 || m < cutoff {
            continue;
        }
        if let Some(reach) = cfg.reach {
            if j.unsigned_abs() as f64 > reach * n as f64 {
                continue;
            }
        }
        let ratio = (m.ln() - log_envelope(tangencies, c, j, n)).exp();
        if ratio > best.0 {
            best = (ratio, j);
        }
    }
    best
}

/// Constant needed at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub n: usize,
    pub constant: f64,
    pub worst_j: i64,
}

/// Fitted `(C, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    pub constant: f64,
    pub rate: f64,
    pub n_list: Vec<usize>,
    pub points: Vec<FitPoint>,
}

/// Scans log-spaced rates `c` in `[c_min, c_max]` and keeps the largest one
/// whose constant `C = max_n C_n(c)` stays below the cap.
pub fn fit_envelope(
    profiles: &[GreenProfile],
    tangencies: &[TangencyPoint],
    cfg: &EnvelopeConfig,
) -> Result<EnvelopeFit> {
    let mut sorted: Vec<&GreenProfile> = profiles.iter().collect();
    sorted.sort_by_key(|p| p.meta.n.unwrap_or(0));
    let n_list: Vec<usize> = sorted.iter().map(|p| p.meta.n.unwrap_or(0)).collect();
    let mut c = cfg.c_min;
    let mut best: Option<EnvelopeFit> = None;
    while c <= cfg.c_max * (1.0 + 1e-12) {
        let points: Vec<FitPoint> = sorted
            .iter()
            .map(|p| {
                let (constant, worst_j) = profile_constant(p, tangencies, c, cfg);
                FitPoint {
                    n: p.meta.n.unwrap_or(0),
                    constant,
                    worst_j,
                }
            })
            .collect();
        let constant = points.iter().map(|p| p.constant).fold(0.0, f64::max);
        if constant <= cfg.c_cap {
            best = Some(EnvelopeFit {
                constant,
                rate: c,
                n_list: n_list.clone(),
                points,
            });
        }
        c *= cfg.ratio;
    }
    best.ok_or(Error::NoValidEnvelope { cap: cfg.c_cap })
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

fn poly_derivative(a: &[Complex64]) -> Vec<Complex64> {
    if a.len() <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

/// Saddle points of `kappa -> log F(kappa) + s log kappa`: the roots of
/// `kappa (P0' P1 - P0 P1') + s P0 P1` with `P_i = kappa^r Q_i`.
pub fn saddle_points(pair: &SchemePair, s: f64) -> Result<Vec<Complex64>> {
    let span = -(pair.r() as i64)..=pair.p() as i64;
    let p0: Vec<Complex64> = span.clone().map(|l| pair.q0().coeff(l)).collect();
    let p1: Vec<Complex64> = span.map(|l| pair.q1().coeff(l)).collect();
    let cross: Vec<Complex64> = {
        let a = poly_mul(&poly_derivative(&p0), &p1);
        let b = poly_mul(&p0, &poly_derivative(&p1));
        let len = a.len().max(b.len());
        (0..len)
            .map(|i| a.get(i).copied().unwrap_or_default() - b.get(i).copied().unwrap_or_default())
            .collect()
    };
    let prod = poly_mul(&p0, &p1);
    let len = prod.len().max(cross.len() + 1);
    let mut eq: Vec<Complex64> = (0..len)
        .map(|i| {
            let shifted = if i == 0 {
                Complex64::default()
            } else {
                cross.get(i - 1).copied().unwrap_or_default()
            };
            shifted + prod.get(i).copied().unwrap_or_default() * s
        })
        .collect();
    let scale = eq.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while eq.len() > 1 && eq.last().is_some_and(|c| c.norm() <= 1e-14 * scale) {
        eq.pop();
    }
    crate::roots::polynomial_roots(&eq)
}

/// Asymptotic decay rate along the ray `j = s n` allowed by the saddle points:
/// the smallest `-log|F(kappa)| - s log|kappa|` over saddle points where it is
/// nonnegative. Saddles with a negative value cannot dominate a bounded
/// sequence and are skipped. `None` when no saddle qualifies.
pub fn saddle_rate(pair: &SchemePair, s: f64) -> Result<Option<f64>> {
    let scale = pair.coeff_scale();
    let mut best: Option<f64> = None;
    for kappa in saddle_points(pair, s)? {
        let m = kappa.norm();
        if !(1e-8..=1e8).contains(&m) {
            continue;
        }
        let q0 = pair.q0().eval(kappa)?;
        let q1 = pair.q1().eval(kappa)?;
        if q0.norm() <= 1e-10 * scale || q1.norm() <= 1e-10 * scale {
            continue;
        }
        let rate = -(q0 / q1).norm().ln() - s * m.ln();
        if rate >= 0.0 {
            best = Some(best.map_or(rate, |b: f64| b.min(rate)));
        }
    }
    Ok(best)
}

/// Upper bound on the envelope rate from the saddle-point decay along rays:
/// `min_s I(s) / min_k |s - alpha_k|^{2 mu_k / (2 mu_k - 1)}` over rays
/// `|s| <= s_max` sampled every `1 / samples_per_unit`, skipping rays closer
/// than `exclusion` to a drift.
pub fn saddle_rate_bound(
    analysis: &SchemeAnalysis,
    s_max: f64,
    samples_per_unit: usize,
    exclusion: f64,
) -> Result<Option<f64>> {
    let count = (s_max * samples_per_unit as f64).ceil() as i64;
    let mut bound: Option<f64> = None;
    for i in -count..=count {
        let s = i as f64 / samples_per_unit as f64;
        let g = analysis
            .tangencies
            .iter()
            .map(|t| {
                let two_mu = 2.0 * t.mu as f64;
                (s - t.alpha).abs().powf(two_mu / (two_mu - 1.0))
            })
            .fold(f64::INFINITY, f64::min);
        if analysis
            .tangencies
            .iter()
            .any(|t| (s - t.alpha).abs() < exclusion)
        {
            continue;
        }
        if let Some(rate) = saddle_rate(&analysis.pair, s)? {
            let ratio = rate / g;
            bound = Some(bound.map_or(ratio, |b: f64| b.min(ratio)));
        }
    }
    Ok(bound)
}

/// Outcome of the uniformity test at one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPoint {
    pub n: usize,
    /// `max |G^n_j| / (inflation * C * E_c(j, n))`; the bound holds when at most one.
    pub max_ratio: f64,
    pub worst_j: i64,
    /// Space-time region of the worst point: `D_k` near drift `k`, `D_*` elsewhere.
    pub sector: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub fit: EnvelopeFit,
    /// Rate ceiling from [`saddle_rate_bound`] applied to the scan.
    pub saddle_bound: Option<f64>,
    pub tests: Vec<TestPoint>,
    pub passed: bool,
}

fn sector_label(tangencies: &[TangencyPoint], pair: &SchemePair, j: i64, n: usize) -> String {
    let s = j as f64 / n as f64;
    if s > pair.r() as f64 || s < -(pair.p() as f64) {
        return "D_*".into();
    }
    tangencies
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.alpha - s).abs().total_cmp(&(b.1.alpha - s).abs()))
        .map(|(k, _)| format!("D_{}", k + 1))
        .unwrap_or_else(|| "D_*".into())
}

/// Fits `(C, c)` on `n_fit / 4, n_fit / 2, n_fit`, with rates capped by the
/// saddle-point bound over the tested rays, and checks the bound with
/// `(inflation * C, c)` at every `n` in `n_test`.
pub fn verify_theorem1(
    analysis: &SchemeAnalysis,
    n_fit: usize,
    n_test: &[usize],
    cfg: &EnvelopeConfig,
) -> Result<Theorem1Report> {
    let pair = &analysis.pair;
    let policy = WindowPolicy::for_analysis(analysis);
    let mut fit_ns: Vec<usize> = [n_fit / 4, n_fit / 2, n_fit]
        .into_iter()
        .filter(|&n| n > 0)
        .collect();
    fit_ns.dedup();
    let fit_profiles = fit_ns
        .par_iter()
        .map(|&n| power_profile(pair, n, &policy))
        .collect::<Result<Vec<_>>>()?;
    let s_max = cfg.reach.unwrap_or_else(|| pair.r().max(pair.p()) as f64);
    let saddle_bound = saddle_rate_bound(analysis, s_max, 64, 1.0 / 16.0)?;
    let fit_cfg = EnvelopeConfig {
        c_max: saddle_bound.map_or(cfg.c_max, |b| b.min(cfg.c_max)),
        ..*cfg
    };
    let fit = fit_envelope(&fit_profiles, &analysis.tangencies, &fit_cfg)?;
    let tests = n_test
        .par_iter()
        .map(|&n| {
            let profile = power_profile(pair, n, &policy)?;
            let (constant, worst_j) =
                profile_constant(&profile, &analysis.tangencies, fit.rate, cfg);
            Ok(TestPoint {
                n,
                max_ratio: constant / (cfg.inflation * fit.constant),
                worst_j,
                sector: sector_label(&analysis.tangencies, pair, worst_j, n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = fit.rate > 0.0 && tests.iter().all(|t| t.max_ratio <= 1.0);
    Ok(Theorem1Report {
        fit,
        saddle_bound,
        tests,
        passed,
    })
}

/// Sampling plan for [`far_field_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldConfig {
    /// `R`: the fit covers `Re tau >= R`.
    pub radius: f64,
    /// Offsets of the sampled lines `Re tau = R + offset`.
    pub offsets: Vec<f64>,
    pub angles: usize,
    /// Half-width of the `j` range used for the constant.
    pub window: i64,
    /// Safety factor applied to `L`.
    pub margin: f64,
}

impl Default for FarFieldConfig {
    fn default() -> Self {
        FarFieldConfig {
            radius: PI / 2.0,
            offsets: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            angles: 64,
            window: 200,
            margin: 1.05,
        }
    }
}

/// Constants of the bound `|G_z(j)| |z| <= C e^{-c |j|}` on `|z| >= e^R`, and
/// the reach `L = margin * max(max(p, r), 2 R / c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldFit {
    pub radius: f64,
    pub rate: f64,
    pub constant: f64,
    pub reach: f64,
}

impl From<FarFieldFit> for FarField {
    fn from(fit: FarFieldFit) -> Self {
        FarField {
            rate: fit.rate,
            reach: fit.reach,
        }
    }
}

/// Samples `|G_z(j)| |z|` on vertical lines `Re tau = R + offset` and fits
/// `(C, c)`; see [`FarFieldFit`].
pub fn far_field_fit(pair: &SchemePair, cfg: &FarFieldConfig) -> Result<FarFieldFit> {
    let mut samples = Vec::new();
    for &off in &cfg.offsets {
        for k in 0..cfg.angles {
            let tau = Complex64::new(
                cfg.radius + off,
                -PI + 2.0 * PI * k as f64 / cfg.angles as f64,
            );
            samples.push(ModalGreen::by_modulus(pair, tau.exp())?);
        }
    }
    let rate = samples
        .iter()
        .map(|m| {
            let right = m
                .stable_roots()
                .iter()
                .map(|k| -k.norm().ln())
                .fold(f64::INFINITY, f64::min);
            let left = m
                .unstable_roots()
                .iter()
                .map(|k| k.norm().ln())
                .fold(f64::INFINITY, f64::min);
            right.min(left)
        })
        .fold(f64::INFINITY, f64::min);
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::NoValidEnvelope { cap: f64::INFINITY });
    }
    let constant = samples
        .iter()
        .flat_map(|m| {
            let zn = m.z().norm();
            (-cfg.window..=cfg.window)
                .map(move |j| m.value(j).norm() * zn * (rate * j.abs() as f64).exp())
        })
        .fold(0.0, f64::max);
    let stencil = pair.r().max(pair.p()) as f64;
    Ok(FarFieldFit {
        radius: cfg.radius,
        rate,
        constant,
        reach: cfg.margin * stencil.max(2.0 * cfg.radius / rate),
    })
}

/// Outcome of [`verify_far_field`].
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldReport {
    pub fit: FarFieldFit,
    /// `max e^{(c/2)|j|} |G^n_j| / C` over the tested points.
    pub max_ratio: f64,
    pub worst: (usize, i64),
    pub passed: bool,
}

/// Checks `|G^n_j| <= C e^{-(c/2)|j|}` for `1 <= n <= n_max` and
/// `|j| > factor * n`, using tilted iterations to avoid underflow.
pub fn verify_far_field(
    pair: &SchemePair,
    fit: FarFieldFit,
    n_max: usize,
    factor: f64,
) -> Result<FarFieldReport> {
    let half_rate = fit.rate / 2.0;
    let policy = WindowPolicy {
        speed: factor,
        margin: 200,
        ..Default::default()
    };
    let results = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut worst = (0.0, (n, 0));
            for sign in [1.0, -1.0] {
                let w = tilted_power_profile(pair, sign * half_rate, n, &policy)?;
                for (j, v) in w.iter() {
                    if (j as f64) * sign > factor * n as f64 {
                        let ratio = v.norm() / fit.constant;
                        if ratio > worst.0 {
                            worst = (ratio, (n, j));
                        }
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let (max_ratio, worst) = results
        .into_iter()
        .fold((0.0, (0, 0)), |a, b| if b.0 > a.0 { b } else { a });
    Ok(FarFieldReport {
        fit,
        max_ratio,
        worst,
        passed: max_ratio <= 1.0,
    })
}
