//! Contour-integral representation of the temporal Green's function,
//! `G^n_j = (1 / 2 pi i) int_Gamma e^{n tau} G_{e^tau}(j) e^tau d tau`.
//!
//! `Gamma` is the vertical line `Re tau = -eta` across a strip of height `2 pi`,
//! deformed inside balls `B_eps(i theta_k)` around the tangency values. Inside a
//! ball the spatial Green's function is continued holomorphically across the
//! spectrum curve by following the tangency branch `kappa_k(e^tau)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::assumptions::{SchemeAnalysis, TangencyPoint};
use crate::error::{Error, Result};
use crate::profile::{GreenProfile, ProfileMeta};
use crate::quadrature::integrate;
use crate::roots::polynomial_roots;
use crate::spatial_green::ModalGreen;
use crate::spectral::{continue_along, dispersion_poly};
use crate::symbols::SchemePair;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Tunable parameters of the contour family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourParams {
    /// Distance of the base line to the imaginary axis.
    pub eta: f64,
    /// Radius of the balls around the tangency values.
    pub epsilon: f64,
    /// Wedge apex `tau_m = (c_wedge / 2) |j| / n`.
    pub c_wedge: f64,
    pub quad_tol: f64,
    pub max_panels: usize,
    /// Smallest `| log |kappa| |` accepted outside the balls.
    pub clearance: f64,
    /// How many times `eta` may be halved after a spectrum crossing.
    pub max_halvings: usize,
}

impl Default for ContourParams {
    fn default() -> Self {
        ContourParams {
            eta: 0.05,
            epsilon: 0.3,
            c_wedge: 1.0,
            quad_tol: 1e-9,
            max_panels: 1 << 12,
            clearance: 1e-4,
            max_halvings: 6,
        }
    }
}

/// Far-field regime `|j| > n L`, integrated on `Re tau = c |j| / (2 n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    pub rate: f64,
    pub reach: f64,
}

impl FarField {
    /// For explicit schemes `G^n_j` vanishes beyond `n max(p, r)`.
    pub fn explicit(pair: &SchemePair) -> Self {
        FarField {
            rate: 1.0,
            reach: pair.r().max(pair.p()) as f64,
        }
    }
}

/// Apex selection for the curve `Gamma_p`, in coordinates normalized by `sgn alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSelector {
    pub zeta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub tau_p: f64,
}

impl DriftSelector {
    /// `zeta = (j - n alpha) / (2 mu n)`, `gamma = (j / n) beta / alpha^{2 mu}`,
    /// `rho = sgn(zeta) (|zeta| / gamma)^{1/(2 mu - 1)}`, `tau_p = clamp(rho, -eta/2, eps0)`.
    pub fn new(t: &TangencyPoint, j: i64, n: usize, eta: f64, eps0: f64) -> Self {
        let sign = t.alpha.signum();
        let a = t.alpha.abs();
        let jj = sign * j as f64;
        let n_f = n as f64;
        let two_mu = 2.0 * t.mu as f64;
        let zeta = (jj - n_f * a) / (two_mu * n_f);
        let gamma = (jj / n_f) * t.beta / a.powf(two_mu);
        let rho = if zeta == 0.0 {
            0.0
        } else {
            zeta.signum() * (zeta.abs() / gamma).powf(1.0 / (two_mu - 1.0))
        };
        let tau_p = if rho.is_nan() {
            -eta / 2.0
        } else {
            rho.clamp(-eta / 2.0, eps0)
        };
        DriftSelector {
            zeta,
            gamma,
            rho,
            tau_p,
        }
    }
}

/// Level curve `x + (-1)^mu b Re((x + i y)^{2 mu}) = Psi` in coordinates
/// centered at the tangency value, with `b = beta / alpha^{2 mu}` and
/// `Psi = tau_p + (-1)^mu b tau_p^{2 mu}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaCurve {
    pub b: f64,
    pub mu: usize,
    pub tau_p: f64,
    pub psi: f64,
}

impl GammaCurve {
    pub fn new(t: &TangencyPoint, tau_p: f64) -> Self {
        let b = t.beta / t.alpha.abs().powi(2 * t.mu as i32);
        let sigma = if t.mu.is_multiple_of(2) { 1.0 } else { -1.0 };
        GammaCurve {
            b,
            mu: t.mu,
            tau_p,
            psi: tau_p + sigma * b * tau_p.powi(2 * t.mu as i32),
        }
    }

    fn sigma(&self) -> f64 {
        if self.mu.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `f(x, y)`; increasing in `x` near the tangency value.
    pub fn level(&self, x: f64, y: f64) -> f64 {
        let w = Complex64::new(x, y).powi(2 * self.mu as i32);
        x + self.sigma() * self.b * w.re - self.psi
    }

    fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let m = 2.0 * self.mu as f64;
        let w = Complex64::new(x, y).powi(2 * self.mu as i32 - 1);
        let s = self.sigma() * self.b * m;
        (1.0 + s * w.re, -s * w.im)
    }

    /// Solves `f(x, y) = 0` for `x` in `[lo, hi]` by safeguarded Newton.
    pub fn x_at(&self, y: f64, lo: f64, hi: f64) -> Result<f64> {
        let (mut lo, mut hi) = (lo, hi);
        let (flo, fhi) = (self.level(lo, y), self.level(hi, y));
        if flo > 0.0 || fhi < 0.0 {
            return Err(Error::DegenerateSector { epsilon: hi - lo });
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.level(x, y);
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let (fx, _) = self.gradient(x, y);
            let newton = x - f / fx;
            let next = if fx > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    /// Slope `dx/dy = -f_y / f_x` along the curve.
    pub fn slope(&self, x: f64, y: f64) -> f64 {
        let (fx, fy) = self.gradient(x, y);
        -fy / fx
    }

    /// Height `y > 0` where the curve meets the base line `x = -eta`.
    pub fn endpoint(&self, eta: f64) -> Result<f64> {
        let g = |y: f64| self.level(-eta, y);
        if g(0.0) >= 0.0 {
            return Err(Error::DegenerateSector { epsilon: eta });
        }
        let mut hi = eta.max(1e-3);
        let mut guard = 0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 60 {
                return Err(Error::DegenerateSector { epsilon: eta });
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Largest apex `eps0` in `[-eta/2, eps]` whose curve meets the base line
/// inside the closed ball `B_eps`.
pub fn epsilon0(t: &TangencyPoint, eta: f64, eps: f64) -> Result<f64> {
    let h = |tau_p: f64| -> Result<f64> {
        let l = GammaCurve::new(t, tau_p).endpoint(eta)?;
        Ok(eta * eta + l * l - eps * eps)
    };
    let mut lo = -eta / 2.0;
    let mut hi = eps;
    if h(lo)? > 0.0 {
        return Err(Error::DegenerateSector { epsilon: eps });
    }
    if h(hi)? <= 0.0 {
        return Ok(hi);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if h(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(lo)
}

/// A tangency value lifted into the integration strip, with its members.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: f64,
    pub members: Vec<usize>,
}

/// How a ball is crossed for a given `(j, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deformation {
    Plain,
    Gamma {
        member: usize,
        selector: DriftSelector,
        epsilon0: f64,
        half_height: f64,
    },
    Wedge {
        member: usize,
        apex: f64,
    },
}

/// One smooth piece of the contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Segment {
        from: Complex64,
        to: Complex64,
    },
    Gamma {
        center: f64,
        curve: GammaCurve,
        half_height: f64,
        eta: f64,
    },
}

/// A contour for one `(j, n)`, oriented upward through the strip
/// `Im tau in [strip_start, strip_start + 2 pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPlan {
    pub pieces: Vec<Piece>,
    /// One entry per ball; empty in the far field.
    pub deformations: Vec<Deformation>,
    pub far_field: bool,
    pub eta: f64,
    pub epsilon: f64,
    pub strip_start: f64,
}

/// Per-scheme data shared by every contour evaluation.
#[derive(Debug, Clone)]
pub struct ContourSolver {
    pub pair: SchemePair,
    pub tangencies: Vec<TangencyPoint>,
    pub balls: Vec<Ball>,
    pub strip_start: f64,
    pub far: FarField,
    pub params: ContourParams,
}

impl ContourSolver {
    /// Lifts the tangency values into a strip whose edges sit in the widest gap,
    /// checks the balls are separated by `4 eps`, and halves `eta` until the
    /// base line clears the spectrum curve.
    pub fn new(analysis: &SchemeAnalysis, far: FarField, params: ContourParams) -> Result<Self> {
        let tangencies = analysis.tangencies.clone();
        let mut thetas: Vec<f64> = Vec::new();
        for t in &tangencies {
            if !thetas.iter().any(|&s| circular_distance(s, t.theta) < 1e-6) {
                thetas.push(t.theta);
            }
        }
        thetas.sort_by(f64::total_cmp);
        let strip_start = widest_gap_midpoint(&thetas);
        let mut balls: Vec<Ball> = thetas
            .iter()
            .map(|&th| {
                let mut center = th;
                while center <= strip_start {
                    center += 2.0 * PI;
                }
                while center > strip_start + 2.0 * PI {
                    center -= 2.0 * PI;
                }
                let members = tangencies
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| circular_distance(t.theta, th) < 1e-6)
                    .map(|(k, _)| k)
                    .collect();
                Ball { center, members }
            })
            .collect();
        balls.sort_by(|a, b| a.center.total_cmp(&b.center));
        for (i, a) in balls.iter().enumerate() {
            let edge_gap = (a.center - strip_start).min(strip_start + 2.0 * PI - a.center);
            if edge_gap < 2.0 * params.epsilon {
                return Err(Error::DegenerateSector {
                    epsilon: params.epsilon,
                });
            }
            if let Some(b) = balls.get(i + 1) {
                if b.center - a.center < 4.0 * params.epsilon {
                    return Err(Error::DegenerateSector {
                        epsilon: params.epsilon,
                    });
                }
            }
        }
        let mut solver = ContourSolver {
            pair: analysis.pair.clone(),
            tangencies,
            balls,
            strip_start,
            far,
            params,
        };
        for _ in 0..=params.max_halvings {
            if solver.base_line_clear() {
                return Ok(solver);
            }
            solver.params.eta /= 2.0;
        }
        Err(Error::SpectrumCrossing {
            tau: Complex64::new(-solver.params.eta, strip_start),
        })
    }

    fn base_line_clear(&self) -> bool {
        let samples = 1024;
        (0..=samples).all(|k| {
            let y = self.strip_start + 2.0 * PI * k as f64 / samples as f64;
            let tau = Complex64::new(-self.params.eta, y);
            self.green_at(tau, 0).is_ok()
        })
    }

    fn ball_of(&self, tau: Complex64) -> Option<&Ball> {
        self.balls
            .iter()
            .find(|b| (tau - I * b.center).norm() <= self.params.epsilon)
    }

    /// `G_{e^tau}(j)`, continued across the spectrum curve inside the balls.
    pub fn green_at(&self, tau: Complex64, j: i64) -> Result<Complex64> {
        let z = tau.exp();
        let coeffs = dispersion_poly(&self.pair, z)?;
        let mut roots = polynomial_roots(&coeffs)?;
        let mut stable = Vec::new();
        let mut unstable = Vec::new();
        if let Some(ball) = self.ball_of(tau) {
            let center = I * ball.center;
            for &m in &ball.members {
                let t = &self.tangencies[m];
                let kappa =
                    continue_along(&self.pair, t.kappa, |s| (center + (tau - center) * s).exp())?;
                let idx = roots
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - kappa).norm().total_cmp(&(b.1 - kappa).norm()))
                    .map(|(i, _)| i)
                    .ok_or(Error::BranchLost { z })?;
                let root = roots.swap_remove(idx);
                if t.alpha > 0.0 {
                    stable.push(root);
                } else {
                    unstable.push(root);
                }
            }
            for k in roots {
                if k.norm() < 1.0 {
                    stable.push(k);
                } else {
                    unstable.push(k);
                }
            }
        } else {
            for k in roots {
                let gap = k.norm().ln();
                if gap.abs() < self.params.clearance {
                    return Err(Error::SpectrumCrossing { tau });
                }
                if gap < 0.0 {
                    stable.push(k);
                } else {
                    unstable.push(k);
                }
            }
        }
        if stable.len() != self.pair.r() || unstable.len() != self.pair.p() {
            return Err(Error::SpectrumCrossing { tau });
        }
        Ok(ModalGreen::new(&self.pair, z, &stable, &unstable)?.value(j))
    }

    /// Sector bounds `(lower, upper)` of `|j| / n` for the member `k`:
    /// midpoints to the neighboring drift speeds on the same side, padded by
    /// zero and the stencil (explicit) or far-field reach (implicit).
    pub fn sector(&self, k: usize) -> (f64, f64) {
        let alpha = self.tangencies[k].alpha;
        let outer = if !self.pair.is_explicit() {
            self.far.reach
        } else if alpha > 0.0 {
            self.pair.r() as f64
        } else {
            self.pair.p() as f64
        };
        let mut speeds: Vec<f64> = self
            .tangencies
            .iter()
            .filter(|t| t.alpha.signum() == alpha.signum())
            .map(|t| t.alpha.abs())
            .collect();
        speeds.sort_by(f64::total_cmp);
        speeds.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut ladder = vec![0.0];
        ladder.extend(speeds);
        ladder.push(outer.max(2.0 * alpha.abs()));
        let i = ladder
            .iter()
            .position(|&s| (s - alpha.abs()).abs() < 1e-9)
            .expect("member speed is on the ladder");
        (
            0.5 * (ladder[i - 1] + ladder[i]),
            0.5 * (ladder[i] + ladder[i + 1]),
        )
    }

    /// Builds the contour for `(j, n)` with the current parameters.
    pub fn build(&self, j: i64, n: usize) -> Result<ContourPlan> {
        self.build_with_eta(j, n, self.params.eta)
    }

    fn build_with_eta(&self, j: i64, n: usize, eta: f64) -> Result<ContourPlan> {
        let eps = self.params.epsilon;
        let bottom = self.strip_start;
        let top = bottom + 2.0 * PI;
        let s = j as f64 / n as f64;
        if s.abs() > self.far.reach {
            let x = self.far.rate * s.abs() / 2.0;
            return Ok(ContourPlan {
                pieces: vec![Piece::Segment {
                    from: Complex64::new(x, bottom),
                    to: Complex64::new(x, top),
                }],
                deformations: Vec::new(),
                far_field: true,
                eta,
                epsilon: eps,
                strip_start: bottom,
            });
        }
        let mut pieces = Vec::new();
        let mut deformations = Vec::new();
        let mut y = bottom;
        let push_base = |pieces: &mut Vec<Piece>, from: f64, to: f64| {
            if to > from {
                pieces.push(Piece::Segment {
                    from: Complex64::new(-eta, from),
                    to: Complex64::new(-eta, to),
                });
            }
        };
        for ball in &self.balls {
            let member = ball
                .members
                .iter()
                .copied()
                .find(|&m| j != 0 && self.tangencies[m].alpha.signum() == (j as f64).signum());
            let deformation = match member {
                None => Deformation::Plain,
                Some(m) => {
                    let (lower, upper) = self.sector(m);
                    if s.abs() < lower {
                        Deformation::Plain
                    } else if s.abs() <= upper {
                        let t = &self.tangencies[m];
                        let eps0 = epsilon0(t, eta, eps)?;
                        let selector = DriftSelector::new(t, j, n, eta, eps0);
                        let half_height = GammaCurve::new(t, selector.tau_p).endpoint(eta)?;
                        Deformation::Gamma {
                            member: m,
                            selector,
                            epsilon0: eps0,
                            half_height,
                        }
                    } else {
                        Deformation::Wedge {
                            member: m,
                            apex: 0.5 * self.params.c_wedge * s.abs(),
                        }
                    }
                }
            };
            let c = ball.center;
            match deformation {
                Deformation::Plain => {}
                Deformation::Gamma {
                    member,
                    selector,
                    half_height,
                    ..
                } => {
                    push_base(&mut pieces, y, c - half_height);
                    pieces.push(Piece::Gamma {
                        center: c,
                        curve: GammaCurve::new(&self.tangencies[member], selector.tau_p),
                        half_height,
                        eta,
                    });
                    y = c + half_height;
                }
                Deformation::Wedge { apex, .. } => {
                    push_base(&mut pieces, y, c - 2.0 * eps);
                    let tip = Complex64::new(apex, c);
                    pieces.push(Piece::Segment {
                        from: Complex64::new(-eta, c - 2.0 * eps),
                        to: tip,
                    });
                    pieces.push(Piece::Segment {
                        from: tip,
                        to: Complex64::new(-eta, c + 2.0 * eps),
                    });
                    y = c + 2.0 * eps;
                }
            }
            deformations.push(deformation);
        }
        push_base(&mut pieces, y, top);
        Ok(ContourPlan {
            pieces,
            deformations,
            far_field: false,
            eta,
            epsilon: eps,
            strip_start: bottom,
        })
    }

    /// Integrates along `plan`.
    pub fn contour_value(&self, plan: &ContourPlan, n: usize, j: i64) -> Result<Complex64> {
        let integrand = |tau: Complex64, dtau: Complex64| -> Result<Complex64> {
            let g = self.green_at(tau, j)?;
            Ok((tau * (n as f64 + 1.0)).exp() * g * dtau)
        };
        let tol = self.params.quad_tol;
        let panels = self.params.max_panels;
        let mut total = Complex64::new(0.0, 0.0);
        for piece in &plan.pieces {
            total += match *piece {
                Piece::Segment { from, to } => integrate(
                    |s| integrand(from + (to - from) * s, to - from),
                    0.0,
                    1.0,
                    tol,
                    panels,
                )?,
                Piece::Gamma {
                    center,
                    curve,
                    half_height,
                    eta,
                } => {
                    let lo = -eta - self.params.epsilon;
                    let hi = curve.tau_p + 1e-12;
                    integrate(
                        |y| {
                            let x = curve.x_at(y, lo, hi)?;
                            let tau = Complex64::new(x, center + y);
                            integrand(tau, Complex64::new(curve.slope(x, y), 1.0))
                        },
                        -half_height,
                        half_height,
                        tol,
                        panels,
                    )?
                }
            };
        }
        Ok(total / (2.0 * PI * I))
    }

    /// `G^n_j` by contour integration, halving `eta` after a spectrum crossing.
    pub fn value(&self, j: i64, n: usize) -> Result<Complex64> {
        if n == 0 {
            return Ok(if j == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
        let mut eta = self.params.eta;
        let mut last = None;
        for _ in 0..=self.params.max_halvings {
            let attempt = self
                .build_with_eta(j, n, eta)
                .and_then(|plan| self.contour_value(&plan, n, j));
            match attempt {
                Err(e @ Error::SpectrumCrossing { .. }) => {
                    last = Some(e);
                    eta /= 2.0;
                }
                other => return other,
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// `G^n_j` for `j in [j_min, j_max]`, evaluated in parallel.
    pub fn profile(&self, n: usize, j_min: i64, j_max: i64) -> Result<GreenProfile> {
        let values = (j_min..=j_max)
            .into_par_iter()
            .map(|j| self.value(j, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(GreenProfile::new(
            j_min,
            values,
            ProfileMeta {
                source: "contour".into(),
                z: None,
                n: Some(n),
                scheme: self.pair.name.clone(),
            },
        ))
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Midpoint of the widest circular gap between sorted angles.
fn widest_gap_midpoint(thetas: &[f64]) -> f64 {
    if thetas.is_empty() {
        return -PI;
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (i, &a) in thetas.iter().enumerate() {
        let b = if i + 1 < thetas.len() {
            thetas[i + 1]
        } else {
            thetas[0] + 2.0 * PI
        };
        if b - a > best.0 {
            best = (b - a, 0.5 * (a + b));
        }
    }
    best.1
}
