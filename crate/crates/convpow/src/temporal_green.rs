//! The temporal Green's function `G^n = L^n delta` by direct iteration.
//!
//! The contour-integral route lives in [`crate::contour`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::assumptions::SchemeAnalysis;
use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::profile::{GreenProfile, ProfileMeta};
use crate::quadrature::{integrate, MAX_PANELS};
use crate::symbols::{eval_f, SchemePair};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Window sizing for implicit iterations.
///
/// The half-width is `n * speed + safety * n^{1/(2 mu)} + margin`, certified
/// by re-running on a doubled window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPolicy {
    pub speed: f64,
    pub mu: usize,
    pub safety: f64,
    pub margin: usize,
    pub cap: usize,
    pub certify_tol: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            speed: 1.0,
            mu: 1,
            safety: 8.0,
            margin: 40,
            cap: 1 << 20,
            certify_tol: 1e-11,
        }
    }
}

impl WindowPolicy {
    /// Policy whose speed and order come from the tangency data.
    pub fn for_analysis(analysis: &SchemeAnalysis) -> Self {
        WindowPolicy {
            speed: analysis.max_speed(),
            mu: analysis.min_mu(),
            ..Default::default()
        }
    }

    pub fn half_width(&self, n: usize) -> usize {
        let n_f = n as f64;
        (n_f * self.speed + self.safety * n_f.powf(1.0 / (2 * self.mu) as f64)).ceil() as usize
            + self.margin
    }
}

fn meta(pair: &SchemePair, n: usize, source: &str) -> ProfileMeta {
    ProfileMeta {
        source: source.into(),
        z: None,
        n: Some(n),
        scheme: pair.name.clone(),
    }
}

/// `G^n`, exactly for explicit schemes and on a certified window otherwise.
pub fn power_profile(pair: &SchemePair, n: usize, policy: &WindowPolicy) -> Result<GreenProfile> {
    Ok(power_sequence(pair, n, policy)?
        .pop()
        .expect("sequence holds n + 1 profiles"))
}

/// `G^0, G^1, ..., G^n`.
///
/// Explicit schemes convolve exactly and `G^m` is supported in `[-p m, r m]`.
/// Implicit schemes share one window sized for `n`, certified at `n`.
pub fn power_sequence(
    pair: &SchemePair,
    n: usize,
    policy: &WindowPolicy,
) -> Result<Vec<GreenProfile>> {
    if pair.is_explicit() {
        return Ok(explicit_sequence(pair, n));
    }
    let mut half = policy.half_width(n);
    loop {
        if 2 * half > policy.cap {
            return Err(Error::WindowOverflow {
                half_width: 2 * half,
                cap: policy.cap,
            });
        }
        let coarse = implicit_sequence(pair, n, half)?;
        let fine = implicit_sequence(pair, n, 2 * half)?;
        let last = fine.last().expect("nonempty");
        let sup = last.sup_norm().max(1.0);
        let diff = coarse
            .last()
            .expect("nonempty")
            .sup_diff(&last.restrict(-(half as i64), half as i64));
        if diff < policy.certify_tol * sup {
            let h = half as i64;
            return Ok(fine.into_iter().map(|p| p.restrict(-h, h)).collect());
        }
        half *= 2;
    }
}

fn explicit_sequence(pair: &SchemePair, n: usize) -> Vec<GreenProfile> {
    let (r, p) = (pair.r() as i64, pair.p() as i64);
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = GreenProfile::new(0, vec![Complex64::new(1.0, 0.0)], meta(pair, 0, "iterate"));
    out.push(cur.clone());
    for m in 1..=n {
        // (L u)_j = sum_l a_{l,0} u_{j+l}, so the support grows by p to the left and r to the right.
        let lo = cur.j_min - p;
        let hi = cur.j_max + r;
        let values = (lo..=hi)
            .map(|j| (-r..=p).map(|l| pair.q0().coeff(l) * cur.get(j + l)).sum())
            .collect();
        cur = GreenProfile::new(lo, values, meta(pair, m, "iterate"));
        out.push(cur.clone());
    }
    out
}

fn implicit_sequence(pair: &SchemePair, n: usize, half: usize) -> Result<Vec<GreenProfile>> {
    let (r, p) = (pair.r() as i64, pair.p() as i64);
    let size = 2 * half + 1;
    let h = half as i64;
    let lu = BandedLu::factor(size, r as usize, p as usize, |i, col| {
        pair.q1().coeff(col as i64 - i as i64)
    })?;
    let mut u = vec![ZERO; size];
    u[half] = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(n + 1);
    out.push(GreenProfile::new(-h, u.clone(), meta(pair, 0, "iterate")));
    let mut rhs = vec![ZERO; size];
    for m in 1..=n {
        for (i, slot) in rhs.iter_mut().enumerate() {
            let mut acc = ZERO;
            for l in -r..=p {
                let k = i as i64 + l;
                if k >= 0 && k < size as i64 {
                    acc += pair.q0().coeff(l) * u[k as usize];
                }
            }
            *slot = acc;
        }
        lu.solve(&mut rhs);
        std::mem::swap(&mut u, &mut rhs);
        out.push(GreenProfile::new(-h, u.clone(), meta(pair, m, "iterate")));
    }
    Ok(out)
}

/// `e^{theta j} G^n_j`, computed by iterating the tilted pair with coefficients
/// `a_l e^{-theta l}`.
pub fn tilted_power_profile(
    pair: &SchemePair,
    theta: f64,
    n: usize,
    policy: &WindowPolicy,
) -> Result<GreenProfile> {
    let tilted = pair.tilted(theta);
    let mut prof = power_profile(&tilted, n, policy)?;
    prof.meta.source = format!("iterate (tilt {theta})");
    prof.meta.scheme = pair.name.clone();
    Ok(prof)
}

/// `(1/2 pi) int |F(e^{i xi})|^{2n} d xi`, which equals `||G^n||_2^2`.
pub fn parseval_norm_sq(pair: &SchemePair, n: usize, tol: f64) -> Result<f64> {
    let v = integrate(
        |xi| {
            let f = eval_f(pair, Complex64::from_polar(1.0, xi))?;
            Ok(Complex64::new(f.norm_sqr().powi(n as i32), 0.0))
        },
        -PI,
        PI,
        tol,
        MAX_PANELS,
    )?;
    Ok(v.re / (2.0 * PI))
}
