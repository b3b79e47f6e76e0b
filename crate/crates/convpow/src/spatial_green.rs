//! The spatial Green's function `G_z`, solution of `(z I - L) G_z = delta`.
//!
//! Equivalently `sum_l A_l(z) G_z(j + l) = (Q1 delta)_j`, where
//! `(Q1 delta)_j = a_{-j,1}` for `-p <= j <= r` and zero otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::assumptions::SchemeAnalysis;
use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::profile::{GreenProfile, ProfileMeta};
use crate::spectral::{continue_branch, dispersion_roots, RootClass, CIRCLE_TOL};
use crate::symbols::{coeff_a, SchemePair};

/// Largest half-width tried by [`green_truncated`].
pub const MAX_HALF_WIDTH: usize = 1 << 20;
const DOUBLING_TOL: f64 = 1e-12;
const WINDOW_FLOOR: f64 = 1e-16;
const MAX_MODAL_WINDOW: i64 = 1 << 20;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `(Q1 delta)_j`.
pub fn source_term(pair: &SchemePair, j: i64) -> Complex64 {
    pair.q1().coeff(-j)
}

fn meta(pair: &SchemePair, z: Complex64, source: &str) -> ProfileMeta {
    ProfileMeta {
        source: source.into(),
        z: Some(z),
        n: None,
        scheme: pair.name.clone(),
    }
}

fn solve_window(pair: &SchemePair, z: Complex64, half: usize) -> Result<Vec<Complex64>> {
    let (r, p) = (pair.r(), pair.p());
    let a: Vec<Complex64> = (-(r as i64)..=p as i64)
        .map(|l| coeff_a(pair, l, z))
        .collect::<Result<_>>()?;
    let n = 2 * half + 1;
    // Row i is the equation at j = i - half; column i + l holds G(j + l).
    let lu = BandedLu::factor(n, r, p, |i, col| {
        let l = col as i64 - i as i64;
        a[(l + r as i64) as usize]
    })
    .map_err(|_| Error::NearSpectrum { z })?;
    let mut b: Vec<Complex64> = (0..n)
        .map(|i| source_term(pair, i as i64 - half as i64))
        .collect();
    lu.solve(&mut b);
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NearSpectrum { z });
    }
    Ok(b)
}

/// Solves the recurrence on `[-J, J]` with zero exterior values by banded LU,
/// doubling `J` until the solution stops changing on the common window.
///
/// The returned profile covers `[-J, J]` for the initial `J`, taken from the
/// largest solve.
pub fn green_truncated(pair: &SchemePair, z: Complex64, half_width: usize) -> Result<GreenProfile> {
    let base = half_width.max(10 * (pair.r() + pair.p())).max(1);
    let mut half = base;
    let mut prev = solve_window(pair, z, half)?;
    loop {
        let next_half = 2 * half;
        if next_half > MAX_HALF_WIDTH {
            return Err(Error::NotConverged { half_width: half });
        }
        let next = solve_window(pair, z, next_half)?;
        let offset = next_half - half;
        let mut diff: f64 = 0.0;
        let mut sup: f64 = 0.0;
        for (i, v) in prev.iter().enumerate() {
            diff = diff.max((v - next[i + offset]).norm());
            sup = sup.max(v.norm());
        }
        if sup > 1e12 {
            return Err(Error::NearSpectrum { z });
        }
        if diff < DOUBLING_TOL * sup.max(1.0) {
            let start = next_half - base;
            let values = next[start..=start + 2 * base].to_vec();
            let profile = GreenProfile::new(-(base as i64), values, meta(pair, z, "truncated"));
            if recurrence_residual(pair, z, &profile) > 1e-8 * sup.max(1.0) {
                return Err(Error::NearSpectrum { z });
            }
            return Ok(profile);
        }
        prev = next;
        half = next_half;
    }
}

/// Sup-norm of `sum_l A_l(z) G(j + l) - (Q1 delta)_j` over the interior rows of `profile`.
pub fn recurrence_residual(pair: &SchemePair, z: Complex64, profile: &GreenProfile) -> f64 {
    let (r, p) = (pair.r() as i64, pair.p() as i64);
    let a: Vec<Complex64> = (-r..=p)
        .map(|l| coeff_a(pair, l, z).unwrap_or(ZERO))
        .collect();
    (profile.j_min + r..=profile.j_max - p)
        .map(|j| {
            let lhs: Complex64 = (-r..=p)
                .map(|l| a[(l + r) as usize] * profile.get(j + l))
                .sum();
            (lhs - source_term(pair, j)).norm()
        })
        .fold(0.0, f64::max)
}

/// Closed-form Green's function built from a stable/unstable split of the
/// dispersion roots.
///
/// With `e_k = 1 / prod_{i != k} (kappa_k - kappa_i)` and `s_m = (Q1 delta)_m`,
/// `A_p G(j) = sum_{k stable} e_k sum_{m <= j+r-1} s_m kappa_k^{j+r-1-m}
///           - sum_{k unstable} e_k sum_{m >= j+r} s_m kappa_k^{j+r-1-m}`.
#[derive(Debug, Clone)]
pub struct ModalGreen {
    z: Complex64,
    r: i64,
    p: i64,
    lead: Complex64,
    source: Vec<Complex64>,
    stable: Vec<(Complex64, Complex64)>,
    unstable: Vec<(Complex64, Complex64)>,
}

impl ModalGreen {
    /// Builds the representation for a given split; the roots must be simple.
    pub fn new(
        pair: &SchemePair,
        z: Complex64,
        stable: &[Complex64],
        unstable: &[Complex64],
    ) -> Result<Self> {
        let all: Vec<Complex64> = stable.iter().chain(unstable).copied().collect();
        let scale = all.iter().map(|k| k.norm()).fold(1.0, f64::max);
        let weight = |k: usize| -> Result<Complex64> {
            let mut prod = Complex64::new(1.0, 0.0);
            for (i, other) in all.iter().enumerate() {
                if i != k {
                    let d = all[k] - other;
                    if d.norm() < 1e-8 * scale {
                        return Err(Error::DegenerateRoots { z });
                    }
                    prod *= d;
                }
            }
            Ok(prod.inv())
        };
        let ns = stable.len();
        let stable = (0..ns)
            .map(|k| Ok((all[k], weight(k)?)))
            .collect::<Result<_>>()?;
        let unstable = (ns..all.len())
            .map(|k| Ok((all[k], weight(k)?)))
            .collect::<Result<_>>()?;
        let (r, p) = (pair.r() as i64, pair.p() as i64);
        Ok(ModalGreen {
            z,
            r,
            p,
            lead: coeff_a(pair, p, z)?,
            source: (-p..=r).map(|m| source_term(pair, m)).collect(),
            stable,
            unstable,
        })
    }

    /// Splits the roots by modulus; the split must be `(r, 0, p)`.
    pub fn by_modulus(pair: &SchemePair, z: Complex64) -> Result<Self> {
        let split = dispersion_roots(pair, z, CIRCLE_TOL)?;
        if split.counts() != (pair.r(), 0, pair.p()) {
            return Err(Error::SplitMismatch {
                z,
                stable: split.n_stable,
                circle: split.n_circle,
                unstable: split.n_unstable,
                r: pair.r(),
                p: pair.p(),
            });
        }
        let pick = |c: RootClass| -> Vec<Complex64> {
            split
                .roots
                .iter()
                .filter(|r| r.class == c)
                .map(|r| r.value)
                .collect()
        };
        Self::new(
            pair,
            z,
            &pick(RootClass::Stable),
            &pick(RootClass::Unstable),
        )
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn stable_roots(&self) -> Vec<Complex64> {
        self.stable.iter().map(|s| s.0).collect()
    }

    pub fn unstable_roots(&self) -> Vec<Complex64> {
        self.unstable.iter().map(|s| s.0).collect()
    }

    fn s(&self, m: i64) -> Complex64 {
        self.source[(m + self.p) as usize]
    }

    /// Contribution of the stable modes to `G(j)`.
    pub fn stable_part(&self, j: i64) -> Complex64 {
        let top = self.r.min(j + self.r - 1);
        let mut acc = ZERO;
        for &(kappa, e) in &self.stable {
            let mut inner = ZERO;
            for m in -self.p..=top {
                inner += self.s(m) * kappa.powi((j + self.r - 1 - m) as i32);
            }
            acc += e * inner;
        }
        acc / self.lead
    }

    /// Contribution of the unstable modes to `G(j)`.
    pub fn unstable_part(&self, j: i64) -> Complex64 {
        let bottom = (-self.p).max(j + self.r);
        let mut acc = ZERO;
        for &(kappa, e) in &self.unstable {
            let mut inner = ZERO;
            for m in bottom..=self.r {
                inner += self.s(m) * kappa.powi((j + self.r - 1 - m) as i32);
            }
            acc -= e * inner;
        }
        acc / self.lead
    }

    /// `G(j)`.
    pub fn value(&self, j: i64) -> Complex64 {
        self.stable_part(j) + self.unstable_part(j)
    }

    /// Window outside of which every mode bound is below `floor` times the largest.
    fn window(&self, floor: f64) -> (i64, i64) {
        let reach = |modes: &[(Complex64, Complex64)], sign: f64| -> i64 {
            let mut best = 0i64;
            for &(kappa, e) in modes {
                let coef: Complex64 = (-self.p..=self.r)
                    .map(|m| self.s(m) * kappa.powi((self.r - 1 - m) as i32))
                    .sum::<Complex64>()
                    * e
                    / self.lead;
                let rate = sign * kappa.norm().ln();
                if coef.norm() == 0.0 || rate >= 0.0 {
                    continue;
                }
                let steps = ((floor / coef.norm()).ln() / rate).ceil();
                best = best.max(steps.clamp(0.0, MAX_MODAL_WINDOW as f64) as i64);
            }
            best
        };
        let hi = self.r + 1 + reach(&self.stable, 1.0);
        let lo = -self.p - 1 - reach(&self.unstable, -1.0);
        (lo, hi)
    }

    pub fn profile(&self, scheme: &str, j_min: i64, j_max: i64) -> GreenProfile {
        let values = (j_min..=j_max).map(|j| self.value(j)).collect();
        GreenProfile::new(
            j_min,
            values,
            ProfileMeta {
                source: "modal".into(),
                z: Some(self.z),
                n: None,
                scheme: scheme.into(),
            },
        )
    }
}

/// `G_z` from the modal formulas on the window where it exceeds `1e-16`.
///
/// Falls back to [`green_truncated`] when the dispersion roots are not simple;
/// the profile's source tag records the fallback.
pub fn green_modal(pair: &SchemePair, z: Complex64) -> Result<GreenProfile> {
    match ModalGreen::by_modulus(pair, z) {
        Ok(m) => {
            let (lo, hi) = m.window(WINDOW_FLOOR);
            Ok(m.profile(&pair.name, lo, hi))
        }
        Err(Error::DegenerateRoots { .. }) => {
            let mut prof = green_truncated(pair, z, 200)?;
            prof.meta.source = "truncated (degenerate roots)".into();
            Ok(prof)
        }
        Err(e) => Err(e),
    }
}

/// `G_z` from the modal formulas on `[j_min, j_max]`.
pub fn green_modal_window(
    pair: &SchemePair,
    z: Complex64,
    j_min: i64,
    j_max: i64,
) -> Result<GreenProfile> {
    match ModalGreen::by_modulus(pair, z) {
        Ok(m) => Ok(m.profile(&pair.name, j_min, j_max)),
        Err(Error::DegenerateRoots { .. }) => {
            let half = j_min.unsigned_abs().max(j_max.unsigned_abs()) as usize;
            let mut prof = green_truncated(pair, z, half)?.restrict(j_min, j_max);
            prof.meta.source = "truncated (degenerate roots)".into();
            Ok(prof)
        }
        Err(e) => Err(e),
    }
}

/// Least-squares slopes of `log |G|` against `|j|` on `j in [a, b]` (right) and
/// `j in [-b, -a]` (left).
pub fn decay_rates(profile: &GreenProfile, fit_window: (i64, i64)) -> Result<(f64, f64)> {
    let (a, b) = fit_window;
    let count = (b - a + 1).max(0) as usize;
    if count < 8 || a < 0 {
        return Err(Error::WindowTooShort {
            needed: 8,
            got: count,
        });
    }
    let slope = |sign: i64| -> Result<f64> {
        let mut pts = Vec::with_capacity(count);
        for m in a..=b {
            let j = sign * m;
            if j < profile.j_min || j > profile.j_max {
                return Err(Error::WindowTooShort { needed: 8, got: 0 });
            }
            let v = profile.get(j).norm();
            if v < 1e-14 {
                return Err(Error::Underflow { j });
            }
            pts.push((m as f64, v.ln()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Ok(sxy / sxx)
    };
    Ok((slope(-1)?, slope(1)?))
}

/// Sampling plan for [`verify_spatial_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialBoundsConfig {
    pub radii: Vec<f64>,
    pub angles: usize,
    /// Samples closer than this to a tangency value are left to the near-field clause.
    pub exclusion: f64,
    pub near_eps: Vec<f64>,
    pub reference_modulus: f64,
    pub far_modulus: f64,
    /// Half-width over which `sup |G(j)| e^{c|j|}` is taken.
    pub sup_window: i64,
}

impl Default for SpatialBoundsConfig {
    fn default() -> Self {
        SpatialBoundsConfig {
            radii: vec![1.0 + 1e-3, 1.1, 2.0, 10.0],
            angles: 64,
            exclusion: 0.1,
            near_eps: vec![1e-1, 1e-2, 1e-3],
            reference_modulus: 10.0,
            far_modulus: 1e3,
            sup_window: 200,
        }
    }
}

/// Near-field tracking result for one tangency point and one offset.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTracking {
    pub tangency: usize,
    pub eps: f64,
    pub branch_modulus: f64,
    /// `max / min` of `|G(j)| / |kappa_k(z)|^j` over the governed side.
    pub spread: f64,
    /// Decay rate on the opposite side, `None` for paired groups.
    pub opposite_rate: Option<f64>,
    pub passed: bool,
}

/// Clause-by-clause outcome of [`verify_spatial_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialBoundsReport {
    pub far_constant: f64,
    pub far_rate: f64,
    pub away_passed: bool,
    pub tracking: Vec<BranchTracking>,
    /// Largest offset at which every tangency tracks its branch within a factor 2.
    pub largest_tracking_eps: Option<f64>,
    pub near_passed: bool,
    /// Rates at the reference and far moduli, implicit schemes only.
    pub infinity_rates: Option<(f64, f64)>,
    pub infinity_passed: bool,
}

impl SpatialBoundsReport {
    pub fn passed(&self) -> bool {
        self.away_passed && self.near_passed && self.infinity_passed
    }
}

fn modal_rate(m: &ModalGreen) -> f64 {
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
}

fn min_rate_on_circle(pair: &SchemePair, modulus: f64, angles: usize) -> Result<f64> {
    let mut rate = f64::INFINITY;
    for k in 0..angles {
        let z = Complex64::from_polar(modulus, 2.0 * PI * (k as f64 + 0.5) / angles as f64);
        rate = rate.min(modal_rate(&ModalGreen::by_modulus(pair, z)?));
    }
    Ok(rate)
}

/// Samples the pointwise bounds `|G_z(j)| <= C exp(-c |j|)` away from the
/// tangency values, the branch-governed decay near them, and (implicit schemes)
/// the rate at infinity.
pub fn verify_spatial_bounds(
    analysis: &SchemeAnalysis,
    cfg: &SpatialBoundsConfig,
) -> Result<SpatialBoundsReport> {
    let pair = &analysis.pair;
    let tangencies = &analysis.tangencies;

    let mut samples = Vec::new();
    for &radius in &cfg.radii {
        for k in 0..cfg.angles {
            let z = Complex64::from_polar(radius, 2.0 * PI * k as f64 / cfg.angles as f64);
            if tangencies.iter().all(|t| (z - t.z).norm() >= cfg.exclusion) {
                samples.push(ModalGreen::by_modulus(pair, z)?);
            }
        }
    }
    let far_rate = samples.iter().map(modal_rate).fold(f64::INFINITY, f64::min);
    let far_constant = samples
        .iter()
        .flat_map(|m| {
            (-cfg.sup_window..=cfg.sup_window)
                .map(move |j| m.value(j).norm() * (far_rate * j.abs() as f64).exp())
        })
        .fold(0.0, f64::max);
    let away_passed = far_rate > 0.0 && far_constant.is_finite();

    let mut tracking = Vec::new();
    for (k, t) in tangencies.iter().enumerate() {
        let paired = t.group.len() == 2;
        for &eps in &cfg.near_eps {
            let z = t.z * (1.0 + eps);
            let kappa = continue_branch(pair, t, z)?;
            let m = ModalGreen::by_modulus(pair, z)?;
            let sign: i64 = if t.alpha > 0.0 { 1 } else { -1 };
            let others: Vec<Complex64> = if sign > 0 {
                m.stable_roots()
            } else {
                m.unstable_roots()
            };
            let own = kappa.norm().ln().abs();
            let other_rate = others
                .iter()
                .filter(|o| (*o - kappa).norm() > 1e-6)
                .map(|o| o.norm().ln().abs())
                .fold(f64::INFINITY, f64::min);
            // Start once the faster modes on this side have decayed by a factor 100.
            let start = if other_rate.is_finite() && other_rate > own {
                (100f64.ln() / (other_rate - own)).ceil() as i64
            } else {
                0
            };
            let start = if sign > 0 {
                pair.r() as i64 + 1
            } else {
                pair.p() as i64 + 1
            } + start;
            let length = ((1e-8f64.ln() / -own).ceil() as i64).clamp(16, 4000);
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for step in start..start + length {
                let j = sign * step;
                let ratio = m.value(j).norm() / kappa.norm().powi(j as i32);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            let spread = hi / lo;
            let opposite_rate = if paired {
                None
            } else {
                let opp = if sign > 0 {
                    m.unstable_roots()
                } else {
                    m.stable_roots()
                };
                Some(
                    opp.iter()
                        .map(|o| o.norm().ln().abs())
                        .fold(f64::INFINITY, f64::min),
                )
            };
            let passed = spread <= 2.0 && opposite_rate.is_none_or(|r| r > 0.0);
            tracking.push(BranchTracking {
                tangency: k,
                eps,
                branch_modulus: kappa.norm(),
                spread,
                opposite_rate,
                passed,
            });
        }
    }
    let near_passed = tracking.iter().all(|t| t.passed);
    let largest_tracking_eps = cfg
        .near_eps
        .iter()
        .copied()
        .filter(|&e| tracking.iter().filter(|t| t.eps == e).all(|t| t.passed))
        .fold(None, |acc: Option<f64>, e| {
            Some(acc.map_or(e, |a| a.max(e)))
        });

    let (infinity_rates, infinity_passed) = if pair.is_explicit() {
        (None, true)
    } else {
        let reference = min_rate_on_circle(pair, cfg.reference_modulus, cfg.angles)?;
        let far = min_rate_on_circle(pair, cfg.far_modulus, cfg.angles)?;
        (Some((reference, far)), far >= 0.5 * reference && far > 0.0)
    };

    Ok(SpatialBoundsReport {
        far_constant,
        far_rate,
        away_passed,
        tracking,
        largest_tracking_eps,
        near_passed,
        infinity_rates,
        infinity_passed,
    })
}
