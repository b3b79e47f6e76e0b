//! Structural checks on a scheme and extraction of its tangency data.
//!
//! Near a tangency point `kappa_k` the amplification factor behaves like
//! `F(kappa_k e^{i xi}) / F(kappa_k) = exp(-i alpha xi - beta xi^{2 mu} + ...)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbols::{eval_f, eval_q_symbol, winding_number, SchemePair};

/// Default number of grid points for scans of the unit circle.
pub const GRID_SIZE: usize = 1 << 14;
/// Default tolerance on `1 - |F|^2` for a tangency.
pub const TANGENCY_TOL: f64 = 1e-9;
/// Default tolerance on the real parts of the local expansion coefficients.
pub const EXPANSION_TOL: f64 = 1e-8;
/// Default highest expansion order searched for dissipation.
pub const MAX_ORDER: usize = 8;
/// Default tolerance for two tangency values to count as equal.
pub const GROUP_TOL: f64 = 1e-8;

const CANDIDATE_LEVEL: f64 = 1e-3;
const CAUCHY_POINTS: usize = 64;

/// Local expansion data at one tangency point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangencyPoint {
    /// Tangency point on the unit circle.
    pub kappa: Complex64,
    /// Its image `F(kappa)` on the unit circle.
    pub z: Complex64,
    /// Argument of `z` in `(-pi, pi]`.
    pub theta: f64,
    /// Drift.
    pub alpha: f64,
    /// Half of the dissipation order.
    pub mu: usize,
    /// Dissipation strength.
    pub beta: f64,
    /// Indices of the tangency points sharing the same `z`, this one included.
    pub group: Vec<usize>,
}

/// Result of the `Q1` invertibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct Q1Check {
    pub invertible: bool,
    pub min_modulus: f64,
    /// `None` when the symbol vanishes on the circle or the winding is ambiguous.
    pub winding: Option<i64>,
}

/// `Q1` is invertible on `l^2` when its symbol stays away from zero on the circle
/// and has winding number zero.
pub fn check_q1_invertible(pair: &SchemePair, grid_size: usize) -> Q1Check {
    let q1 = pair.q1();
    let min_modulus = (0..grid_size)
        .map(|k| {
            let xi = 2.0 * PI * k as f64 / grid_size as f64;
            eval_q_symbol(q1, Complex64::from_polar(1.0, xi)).map_or(0.0, |v| v.norm())
        })
        .fold(f64::INFINITY, f64::min);
    if min_modulus <= crate::symbols::SYMBOL_POLE_TOL * q1.max_abs_coeff() {
        return Q1Check {
            invertible: false,
            min_modulus,
            winding: None,
        };
    }
    let winding = winding_number(q1, grid_size).ok();
    Q1Check {
        invertible: winding == Some(0),
        min_modulus,
        winding,
    }
}

/// `A_{-r}` and `A_p` must not vanish on `|z| >= 1`: each is either a nonzero
/// constant or has its single root strictly inside the unit disk.
pub fn check_endpoints(pair: &SchemePair) -> bool {
    const TOL: f64 = 1e-10;
    let scale = pair.coeff_scale();
    [-(pair.r() as i64), pair.p() as i64].iter().all(|&l| {
        let a1 = pair.q1().coeff(l);
        let a0 = pair.q0().coeff(l);
        if a1.norm() <= TOL * scale {
            a0.norm() > TOL * scale
        } else {
            (a0 / a1).norm() < 1.0 - TOL
        }
    })
}

/// Either `Q1` is the identity or both of its end coefficients are nonzero.
pub fn check_support(pair: &SchemePair) -> bool {
    if pair.is_explicit() {
        return true;
    }
    let q1 = pair.q1();
    q1.coeff(-(pair.r() as i64)).norm() > 0.0 && q1.coeff(pair.p() as i64).norm() > 0.0
}

fn gap(pair: &SchemePair, xi: f64) -> Result<f64> {
    Ok(1.0 - eval_f(pair, Complex64::from_polar(1.0, xi))?.norm_sqr())
}

fn gap_derivative(pair: &SchemePair, xi: f64) -> Result<f64> {
    let kappa = Complex64::from_polar(1.0, xi);
    let f = eval_f(pair, kappa)?;
    let df = Complex64::i() * kappa * pair.eval_f_derivative(kappa)?;
    Ok(-2.0 * (f.conj() * df).re)
}

fn wrap_angle(xi: f64) -> f64 {
    let mut x = xi % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Points of the unit circle where `|F| = 1`, in ascending argument order in `(-pi, pi]`.
///
/// `g(xi) = 1 - |F(e^{i xi})|^2` is scanned on `grid` points; local minima are
/// refined by bisection on `g'` and kept when `|g| < tol`.
pub fn find_tangencies(pair: &SchemePair, grid: usize, tol: f64) -> Result<Vec<Complex64>> {
    let h = 2.0 * PI / grid as f64;
    let xs: Vec<f64> = (0..grid).map(|k| -PI + k as f64 * h).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| gap(pair, x)).collect::<Result<_>>()?;
    let (mut g_min, mut at_min) = (f64::INFINITY, 0.0);
    let mut g_max = f64::NEG_INFINITY;
    for (x, g) in xs.iter().zip(&gs) {
        if *g < g_min {
            g_min = *g;
            at_min = *x;
        }
        g_max = g_max.max(*g);
    }
    if g_min < -tol {
        return Err(Error::ModulusExceedsOne {
            xi: at_min,
            g: g_min,
        });
    }
    if g_max - g_min < tol {
        return Err(Error::ConstantModulus);
    }
    let mut found: Vec<f64> = Vec::new();
    for k in 0..grid {
        let prev = gs[(k + grid - 1) % grid];
        let next = gs[(k + 1) % grid];
        let g = gs[k];
        if !(g <= prev && g < next && g < CANDIDATE_LEVEL) {
            continue;
        }
        let xi = refine_minimum(pair, xs[k] - h, xs[k] + h, xs[k])?;
        let xi = polish_minimum(pair, xi)?;
        if gap(pair, xi)?.abs() < tol {
            found.push(wrap_angle(xi));
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in found.windows(2) {
        if (w[1] - w[0]).abs() < 10.0 * tol {
            return Err(Error::CoalescedTangencies {
                first: w[0],
                second: w[1],
            });
        }
    }
    if found.len() >= 2 {
        let wrap = found[0] + 2.0 * PI - found[found.len() - 1];
        if wrap < 10.0 * tol {
            return Err(Error::CoalescedTangencies {
                first: found[found.len() - 1],
                second: found[0],
            });
        }
    }
    Ok(found
        .into_iter()
        .map(|xi| Complex64::from_polar(1.0, xi))
        .collect())
}

fn refine_minimum(pair: &SchemePair, mut a: f64, mut b: f64, fallback: f64) -> Result<f64> {
    let da = gap_derivative(pair, a)?;
    let db = gap_derivative(pair, b)?;
    if da > 0.0 || db < 0.0 {
        return Ok(fallback);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let dm = gap_derivative(pair, m)?;
        if dm == 0.0 {
            return Ok(m);
        }
        if dm < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// `1 - F(e^{i xi}) conj(F(e^{i conj(xi)}))`, the holomorphic extension of
/// `1 - |F(e^{i xi})|^2` off the real axis.
fn gap_extended(pair: &SchemePair, xi: Complex64) -> Result<Complex64> {
    let f = eval_f(pair, (Complex64::i() * xi).exp())?;
    let g = eval_f(pair, (Complex64::i() * xi.conj()).exp())?.conj();
    Ok(Complex64::new(1.0, 0.0) - f * g)
}

/// Newton steps on the lowest-order derivative of the gap that has a simple
/// zero at the tangency, with derivatives from Cauchy integrals. Bisection on
/// `g'` alone stalls at `eps^{1/(2 mu - 1)}` when `mu > 1`.
fn polish_minimum(pair: &SchemePair, mut xi: f64) -> Result<f64> {
    const RADIUS: f64 = 0.05;
    for _ in 0..6 {
        let samples: Vec<(Complex64, Complex64)> = (0..CAUCHY_POINTS)
            .map(|k| {
                let w = Complex64::from_polar(RADIUS, 2.0 * PI * k as f64 / CAUCHY_POINTS as f64);
                Ok((w, gap_extended(pair, xi + w)?))
            })
            .collect::<Result<_>>()?;
        let scaled: Vec<f64> = (0..CAUCHY_POINTS / 2)
            .map(|m| {
                let d: Complex64 = samples.iter().map(|(w, g)| g * w.powi(-(m as i32))).sum();
                (d / CAUCHY_POINTS as f64).re * RADIUS.powi(m as i32)
            })
            .collect();
        // Close to the tangency the term of order 2 mu dominates the expansion.
        let order = (2..scaled.len())
            .max_by(|&a, &b| scaled[a].abs().total_cmp(&scaled[b].abs()))
            .unwrap_or(2);
        if scaled[order] == 0.0 {
            return Ok(xi);
        }
        let step = -RADIUS * scaled[order - 1] / (order as f64 * scaled[order]);
        if !step.is_finite() || step.abs() > RADIUS / 4.0 {
            return Ok(xi);
        }
        xi += step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    Ok(xi)
}

/// Taylor coefficients `c_0..c_order` of `h(xi) = log(F(kappa e^{i xi}) / F(kappa))`
/// by the trapezoidal rule for the Cauchy integral on `|xi| = radius`.
fn expansion_coefficients(
    pair: &SchemePair,
    kappa: Complex64,
    radius: f64,
    order: usize,
) -> Result<Vec<Complex64>> {
    let f0 = eval_f(pair, kappa)?;
    let samples: Vec<(Complex64, Complex64)> = (0..CAUCHY_POINTS)
        .map(|k| {
            let xi = Complex64::from_polar(radius, 2.0 * PI * k as f64 / CAUCHY_POINTS as f64);
            let ratio = eval_f(pair, kappa * (Complex64::i() * xi).exp())? / f0;
            Ok((xi, ratio.ln()))
        })
        .collect::<Result<_>>()?;
    Ok((0..=order)
        .map(|m| {
            samples
                .iter()
                .map(|(xi, h)| h * xi.powi(-(m as i32)))
                .sum::<Complex64>()
                / CAUCHY_POINTS as f64
        })
        .collect())
}

/// Largest radius `<= 0.25` on whose double `|ratio - 1| < 1/2`, so that the
/// logarithm is analytic on a disk twice as large as the integration circle.
fn cauchy_radius(pair: &SchemePair, kappa: Complex64) -> Result<f64> {
    let f0 = eval_f(pair, kappa)?;
    let mut radius = 0.25;
    while radius > 1e-4 {
        let ok = (0..CAUCHY_POINTS).all(|k| {
            let xi =
                Complex64::from_polar(2.0 * radius, 2.0 * PI * k as f64 / CAUCHY_POINTS as f64);
            eval_f(pair, kappa * (Complex64::i() * xi).exp())
                .map(|v| (v / f0 - 1.0).norm() < 0.5)
                .unwrap_or(false)
        });
        if ok {
            return Ok(radius);
        }
        radius *= 0.5;
    }
    Err(Error::ExpansionUnstable { kappa })
}

fn read_expansion(
    c: &[Complex64],
    kappa: Complex64,
    tol: f64,
    max_order: usize,
) -> Result<(f64, usize, f64)> {
    if c[1].im.abs() < tol {
        return Err(Error::ZeroDrift { kappa });
    }
    if c[1].re.abs() >= tol {
        return Err(Error::ExpansionShapeViolated { kappa, order: 1 });
    }
    let alpha = -c[1].im;
    for (m, cm) in c.iter().enumerate().take(max_order + 1).skip(2) {
        if m % 2 == 0 && cm.re < -tol {
            return Ok((alpha, m / 2, -cm.re));
        }
        if cm.re.abs() >= tol {
            return Err(Error::ExpansionShapeViolated { kappa, order: m });
        }
    }
    Err(Error::NotDissipative { kappa, max_order })
}

/// Drift, dissipation order and strength at a refined tangency point.
///
/// The coefficients are read off a Cauchy integral on two radii; the results
/// must agree to `1e-7` in `(alpha, beta)` and exactly in `mu`.
pub fn local_expansion(pair: &SchemePair, kappa: Complex64, tol: f64) -> Result<TangencyPoint> {
    local_expansion_with_order(pair, kappa, tol, MAX_ORDER)
}

/// As [`local_expansion`] with an explicit cap on the searched order.
pub fn local_expansion_with_order(
    pair: &SchemePair,
    kappa: Complex64,
    tol: f64,
    max_order: usize,
) -> Result<TangencyPoint> {
    let radius = cauchy_radius(pair, kappa)?;
    let coarse = expansion_coefficients(pair, kappa, radius, max_order)?;
    let fine = expansion_coefficients(pair, kappa, 0.5 * radius, max_order)?;
    let (alpha, mu, beta) = read_expansion(&coarse, kappa, tol, max_order)?;
    let (alpha2, mu2, beta2) = read_expansion(&fine, kappa, tol, max_order)?;
    if mu != mu2 || (alpha - alpha2).abs() >= 1e-7 || (beta - beta2).abs() >= 1e-7 {
        return Err(Error::ExpansionUnstable { kappa });
    }
    let z = eval_f(pair, kappa)?;
    Ok(TangencyPoint {
        kappa,
        z,
        theta: z.arg(),
        alpha,
        mu,
        beta,
        group: Vec::new(),
    })
}

/// Groups tangency points sharing the same value `z` and checks that each group
/// is a singleton or a pair with drifts of opposite signs.
pub fn group_tangencies(points: &[TangencyPoint], tol: f64) -> Result<Vec<TangencyPoint>> {
    let mut out = points.to_vec();
    for (i, t) in points.iter().enumerate() {
        let class: Vec<usize> = points
            .iter()
            .enumerate()
            .filter(|(_, s)| (s.z - t.z).norm() < tol)
            .map(|(k, _)| k)
            .collect();
        let valid = match class.len() {
            1 => true,
            2 => points[class[0]].alpha * points[class[1]].alpha < 0.0,
            _ => false,
        };
        if !valid {
            return Err(Error::Hyp4Violation { class });
        }
        out[i].group = class;
    }
    Ok(out)
}

/// One failed check.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: &'static str,
    pub location: String,
    pub detail: String,
}

/// Outcome of all structural checks.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub q1_invertible: bool,
    pub index_zero: bool,
    pub endpoints_ok: bool,
    pub support_ok: bool,
    /// Tangency points exist, are finitely many, and have a valid local expansion.
    pub tangencies_ok: bool,
    pub tangencies: Vec<TangencyPoint>,
    pub grouping_ok: bool,
    pub q1_min_modulus: f64,
    pub q1_winding: Option<i64>,
    pub failures: Vec<Failure>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Tunable tolerances for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub grid_size: usize,
    pub tangency_tol: f64,
    pub expansion_tol: f64,
    pub max_order: usize,
    pub group_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            grid_size: GRID_SIZE,
            tangency_tol: TANGENCY_TOL,
            expansion_tol: EXPANSION_TOL,
            max_order: MAX_ORDER,
            group_tol: GROUP_TOL,
        }
    }
}

/// Runs every structural check and collects the failures.
pub fn analyze(pair: &SchemePair, cfg: &AnalysisConfig) -> AssumptionReport {
    let mut failures = Vec::new();
    let q1 = check_q1_invertible(pair, cfg.grid_size);
    let q1_invertible =
        q1.min_modulus > crate::symbols::SYMBOL_POLE_TOL * pair.q1().max_abs_coeff();
    if !q1_invertible {
        failures.push(Failure {
            code: "Q1_SINGULAR",
            location: "Q1".into(),
            detail: format!("min |Q1(e^(i xi))| = {:e}", q1.min_modulus),
        });
    }
    let index_zero = q1.winding == Some(0);
    if q1_invertible && !index_zero {
        failures.push(Failure {
            code: "INDEX_NONZERO",
            location: "Q1".into(),
            detail: format!("winding number {:?}", q1.winding),
        });
    }
    let endpoints_ok = check_endpoints(pair);
    if !endpoints_ok {
        failures.push(Failure {
            code: "ENDPOINT_ROOT_OUTSIDE",
            location: format!("l in {{-{}, {}}}", pair.r(), pair.p()),
            detail: "A_-r or A_p vanishes on |z| >= 1".into(),
        });
    }
    let support_ok = check_support(pair);
    if !support_ok {
        failures.push(Failure {
            code: "SUPPORT_FAIL",
            location: "Q1".into(),
            detail: "Q1 is not the identity and an end coefficient vanishes".into(),
        });
    }
    let mut tangencies = Vec::new();
    let mut tangencies_ok = false;
    let mut grouping_ok = false;
    if q1_invertible {
        match extract_tangencies(pair, cfg) {
            Ok(points) => {
                tangencies_ok = true;
                match group_tangencies(&points, cfg.group_tol) {
                    Ok(grouped) => {
                        grouping_ok = true;
                        tangencies = grouped;
                    }
                    Err(e) => {
                        tangencies = points;
                        failures.push(Failure {
                            code: e.code(),
                            location: "tangencies".into(),
                            detail: e.to_string(),
                        });
                    }
                }
            }
            Err(e) => failures.push(Failure {
                code: e.code(),
                location: "tangencies".into(),
                detail: e.to_string(),
            }),
        }
    }
    AssumptionReport {
        q1_invertible,
        index_zero,
        endpoints_ok,
        support_ok,
        tangencies_ok,
        tangencies,
        grouping_ok,
        q1_min_modulus: q1.min_modulus,
        q1_winding: q1.winding,
        failures,
    }
}

fn extract_tangencies(pair: &SchemePair, cfg: &AnalysisConfig) -> Result<Vec<TangencyPoint>> {
    let kappas = find_tangencies(pair, cfg.grid_size, cfg.tangency_tol)?;
    kappas
        .into_iter()
        .map(|k| local_expansion_with_order(pair, k, cfg.expansion_tol, cfg.max_order))
        .collect()
}

/// A scheme that passed every check, with its grouped tangency data.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeAnalysis {
    pub pair: SchemePair,
    pub tangencies: Vec<TangencyPoint>,
}

impl SchemeAnalysis {
    pub fn new(pair: SchemePair) -> Result<Self> {
        Self::with_config(pair, &AnalysisConfig::default())
    }

    pub fn with_config(pair: SchemePair, cfg: &AnalysisConfig) -> Result<Self> {
        let report = analyze(&pair, cfg);
        if !report.passed() {
            let codes: Vec<&str> = report.failures.iter().map(|f| f.code).collect();
            return Err(Error::AssumptionsFailed(codes.join(", ")));
        }
        Ok(SchemeAnalysis {
            pair,
            tangencies: report.tangencies,
        })
    }

    /// Largest drift magnitude.
    pub fn max_speed(&self) -> f64 {
        self.tangencies
            .iter()
            .map(|t| t.alpha.abs())
            .fold(0.0, f64::max)
    }

    /// Smallest dissipation half-order.
    pub fn min_mu(&self) -> usize {
        self.tangencies.iter().map(|t| t.mu).min().unwrap_or(1)
    }

    /// Distinct groups as lists of tangency indices, in order of first appearance.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for t in &self.tangencies {
            if !seen.contains(&t.group) {
                seen.push(t.group.clone());
            }
        }
        seen
    }
}
