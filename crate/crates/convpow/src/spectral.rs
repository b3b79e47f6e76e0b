//! Dispersion relation, companion matrix, root splitting and branch continuation.
//!
//! Spatial modes `kappa^j` of `(z Q1 - Q0) G = 0` solve the dispersion relation
//! `sum_l A_l(z) kappa^l = 0`; multiplied by `kappa^r` it is a polynomial of
//! degree `p + r` with coefficients `c_i = A_{i-r}(z)`.

use num_complex::Complex64;

use crate::assumptions::TangencyPoint;
use crate::error::{Error, Result};
use crate::roots::polynomial_roots;
use crate::symbols::{coeff_a, eval_f, SchemePair};

/// Default tolerance for classifying a root as lying on the unit circle.
pub const CIRCLE_TOL: f64 = 1e-8;
/// Default radius around a tangency value inside which branches are continued.
pub const BRANCH_RADIUS: f64 = 0.2;

const LEADING_TOL: f64 = 1e-13;

/// Location of a dispersion root relative to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootClass {
    Stable,
    OnCircle,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedRoot {
    pub value: Complex64,
    pub class: RootClass,
}

/// Dispersion roots at `z` classified by modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit {
    pub z: Complex64,
    pub roots: Vec<ClassifiedRoot>,
    pub n_stable: usize,
    pub n_circle: usize,
    pub n_unstable: usize,
}

impl SpectralSplit {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.n_stable, self.n_circle, self.n_unstable)
    }

    /// Smallest distance `| |kappa| - 1 |` over all roots.
    pub fn circle_gap(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| (r.value.norm() - 1.0).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Coefficients `c_0..c_{p+r}` with `c_i = A_{i-r}(z)`.
pub fn dispersion_poly(pair: &SchemePair, z: Complex64) -> Result<Vec<Complex64>> {
    let r = pair.r() as i64;
    let coeffs: Vec<Complex64> = (-r..=pair.p() as i64)
        .map(|l| coeff_a(pair, l, z))
        .collect::<Result<_>>()?;
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if coeffs
        .last()
        .is_none_or(|c| c.norm() <= LEADING_TOL * scale)
    {
        return Err(Error::LeadingCoefficientZero { z });
    }
    Ok(coeffs)
}

/// Roots of the dispersion polynomial, classified against `1 +- circle_tol`.
pub fn dispersion_roots(pair: &SchemePair, z: Complex64, circle_tol: f64) -> Result<SpectralSplit> {
    let coeffs = dispersion_poly(pair, z)?;
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if pair.r() > 0 && coeffs[0].norm() <= LEADING_TOL * scale {
        return Err(Error::TrailingCoefficientZero { z });
    }
    let values = polynomial_roots(&coeffs)?;
    Ok(classify_by_modulus(z, values, circle_tol))
}

pub(crate) fn classify_by_modulus(
    z: Complex64,
    values: Vec<Complex64>,
    circle_tol: f64,
) -> SpectralSplit {
    let roots: Vec<ClassifiedRoot> = values
        .into_iter()
        .map(|value| {
            let m = value.norm();
            let class = if m < 1.0 - circle_tol {
                RootClass::Stable
            } else if m > 1.0 + circle_tol {
                RootClass::Unstable
            } else {
                RootClass::OnCircle
            };
            ClassifiedRoot { value, class }
        })
        .collect();
    let count = |c: RootClass| roots.iter().filter(|r| r.class == c).count();
    SpectralSplit {
        z,
        n_stable: count(RootClass::Stable),
        n_circle: count(RootClass::OnCircle),
        n_unstable: count(RootClass::Unstable),
        roots,
    }
}

/// Outcome of a splitting sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingReport {
    pub samples: usize,
    /// Smallest `| |kappa| - 1 |` seen over all samples.
    pub min_circle_gap: f64,
    /// Samples whose counts differ from `(r, 0, p)`, with the counts found.
    pub violations: Vec<(Complex64, (usize, usize, usize))>,
}

impl SplittingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every sample has `r` stable roots, none on the circle and `p` unstable ones.
pub fn verify_splitting(
    pair: &SchemePair,
    z_samples: &[Complex64],
    circle_tol: f64,
) -> SplittingReport {
    let expected = (pair.r(), 0, pair.p());
    let mut min_gap = f64::INFINITY;
    let mut violations = Vec::new();
    for &z in z_samples {
        match dispersion_roots(pair, z, circle_tol) {
            Ok(split) => {
                min_gap = min_gap.min(split.circle_gap());
                if split.counts() != expected {
                    violations.push((z, split.counts()));
                }
            }
            Err(_) => violations.push((z, (0, 0, 0))),
        }
    }
    SplittingReport {
        samples: z_samples.len(),
        min_circle_gap: min_gap,
        violations,
    }
}

/// The companion matrix `M(z)` of size `p + r`, stored row-major.
///
/// Its first row is `-A_{p-1}/A_p, ..., -A_{-r}/A_p` and its subdiagonal holds ones,
/// so that `W_{j+1} = M(z) W_j` for `W_j = (G(j+p-1), ..., G(j-r))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix {
    pub z: Complex64,
    pub size: usize,
    pub entries: Vec<Complex64>,
}

impl CompanionMatrix {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.size + col]
    }

    /// Determinant, equal to `(-1)^{p+r+1} * (first row, last entry)` for a companion matrix.
    pub fn determinant(&self) -> Complex64 {
        let last = self.get(0, self.size - 1);
        if self.size % 2 == 1 {
            last
        } else {
            -last
        }
    }
}

/// Builds `M(z)`.
pub fn companion(pair: &SchemePair, z: Complex64) -> Result<CompanionMatrix> {
    let coeffs = dispersion_poly(pair, z)?;
    let size = coeffs.len() - 1;
    let lead = coeffs[size];
    let mut entries = vec![Complex64::new(0.0, 0.0); size * size];
    for col in 0..size {
        entries[col] = -coeffs[size - 1 - col] / lead;
    }
    for row in 1..size {
        entries[row * size + row - 1] = Complex64::new(1.0, 0.0);
    }
    Ok(CompanionMatrix { z, size, entries })
}

/// The holomorphic branch `kappa_k(z)` through the tangency point `t`, for `z`
/// within [`BRANCH_RADIUS`] of `t.z`.
pub fn continue_branch(pair: &SchemePair, t: &TangencyPoint, z: Complex64) -> Result<Complex64> {
    continue_branch_within(pair, t, z, BRANCH_RADIUS)
}

/// As [`continue_branch`] with an explicit radius.
pub fn continue_branch_within(
    pair: &SchemePair,
    t: &TangencyPoint,
    z: Complex64,
    radius: f64,
) -> Result<Complex64> {
    if (z - t.z).norm() > radius {
        return Err(Error::OutsideBranchRadius { z, radius });
    }
    let z0 = t.z;
    let kappa = continue_along(pair, t.kappa, |s| z0 + (z - z0) * s)?;
    let residual = (eval_f(pair, kappa)? - z).norm();
    if residual > 1e-12 * z.norm().max(1.0) {
        return Err(Error::BranchLost { z });
    }
    Ok(kappa)
}

/// Follows the root of the dispersion polynomial starting at `kappa0` (a root for
/// `path(0)`) along `s in [0, 1]`, returning the root for `path(1)`.
pub fn continue_along<P>(pair: &SchemePair, kappa0: Complex64, path: P) -> Result<Complex64>
where
    P: Fn(f64) -> Complex64,
{
    let mut steps = 8usize;
    while steps <= 1 << 14 {
        if let Some(k) = try_continue(pair, kappa0, &path, steps) {
            return Ok(k);
        }
        steps *= 4;
    }
    Err(Error::BranchLost { z: path(1.0) })
}

fn try_continue<P>(
    pair: &SchemePair,
    kappa0: Complex64,
    path: &P,
    steps: usize,
) -> Option<Complex64>
where
    P: Fn(f64) -> Complex64,
{
    let mut kappa = kappa0;
    let mut z_prev = path(0.0);
    for i in 1..=steps {
        let z = path(i as f64 / steps as f64);
        let coeffs = dispersion_poly(pair, z).ok()?;
        // Euler predictor: d kappa / d z = -(d P / d z) / (d P / d kappa).
        let q1 = dpoly_dz(pair, kappa);
        let dk = poly_derivative(&coeffs, kappa);
        let predicted = kappa - q1 * (z - z_prev) / dk;
        let mut k = predicted;
        let mut ok = false;
        for _ in 0..30 {
            let step = poly_value(&coeffs, k) / poly_derivative(&coeffs, k);
            if !step.is_finite() {
                return None;
            }
            k -= step;
            if step.norm() <= 1e-15 * k.norm().max(1.0) {
                ok = true;
                break;
            }
        }
        if !ok {
            let resid = poly_value(&coeffs, k).norm();
            let scale: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c.norm() * k.norm().powi(i as i32))
                .sum();
            if resid > 64.0 * f64::EPSILON * scale {
                return None;
            }
        }
        // A corrector far from the predictor means another root was captured.
        let move_len = (predicted - kappa).norm();
        if (k - predicted).norm() > 0.25 * move_len + 1e-10 * kappa.norm().max(1.0) {
            return None;
        }
        kappa = k;
        z_prev = z;
    }
    Some(kappa)
}

/// `d/dz [kappa^r (z Q1(kappa) - Q0(kappa))] = sum_i a_{i-r,1} kappa^i`.
fn dpoly_dz(pair: &SchemePair, kappa: Complex64) -> Complex64 {
    let r = pair.r() as i64;
    (-r..=pair.p() as i64)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, l| {
            acc * kappa + pair.q1().coeff(l)
        })
}

pub(crate) fn poly_value(c: &[Complex64], x: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, ci| acc * x + ci)
}

pub(crate) fn poly_derivative(c: &[Complex64], x: Complex64) -> Complex64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (i, ci)| {
            acc * x + ci * i as f64
        })
}
