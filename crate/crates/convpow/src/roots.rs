//! Simultaneous polynomial root finding (Aberth-Ehrlich) with Newton polishing.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Iteration cap per attempt.
pub const MAX_ITERATIONS: usize = 200;
const RESTARTS: usize = 4;

/// All roots of `sum_i coeffs[i] x^i`, repeated by multiplicity.
///
/// The leading coefficient must be nonzero.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    match degree {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[0] / coeffs[1]]),
        _ => {}
    }
    let lead = coeffs[degree];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let deriv: Vec<Complex64> = (1..=degree).map(|i| monic[i] * i as f64).collect();
    for attempt in 0..RESTARTS {
        let mut z = initial_guesses(&monic, attempt);
        if aberth(&monic, &deriv, &mut z) {
            for root in z.iter_mut() {
                polish(&monic, &deriv, root);
            }
            return Ok(z);
        }
    }
    Err(Error::RootFindingDiverged {
        iterations: MAX_ITERATIONS * RESTARTS,
    })
}

fn horner(c: &[Complex64], x: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, ci| acc * x + ci)
}

/// Size of the evaluation error of `horner` at `x`; residuals below it carry no information.
fn roundoff_bound(c: &[Complex64], x: Complex64) -> f64 {
    let m = x.norm();
    let magnitude = c.iter().rev().fold(0.0, |acc, ci| acc * m + ci.norm());
    8.0 * f64::EPSILON * c.len() as f64 * magnitude
}

fn initial_guesses(monic: &[Complex64], attempt: usize) -> Vec<Complex64> {
    let n = monic.len() - 1;
    // Geometric mean of the root moduli, guarded against a zero constant term.
    let radius = if monic[0].norm() > 0.0 {
        monic[0].norm().powf(1.0 / n as f64)
    } else {
        1.0
    };
    let radius = radius.clamp(1e-8, 1e8);
    let offset = 0.4 + 0.37 * attempt as f64;
    let scale = 1.0 + 0.1 * attempt as f64;
    (0..n)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / n as f64 + offset;
            Complex64::from_polar(radius * scale, angle)
        })
        .collect()
}

fn aberth(monic: &[Complex64], deriv: &[Complex64], z: &mut [Complex64]) -> bool {
    let n = z.len();
    for _ in 0..MAX_ITERATIONS {
        let mut converged = true;
        for k in 0..n {
            let p = horner(monic, z[k]);
            let dp = horner(deriv, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&i| i != k)
                .map(|i| (z[k] - z[i]).inv())
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !w.is_finite() {
                return false;
            }
            z[k] -= w;
            let small_step = w.norm() <= 1e-15 * z[k].norm().max(1e-300);
            if !small_step && p.norm() > roundoff_bound(monic, z[k]) {
                converged = false;
            }
        }
        if converged {
            return true;
        }
    }
    false
}

fn polish(monic: &[Complex64], deriv: &[Complex64], root: &mut Complex64) {
    for _ in 0..3 {
        let dp = horner(deriv, *root);
        if dp.norm() == 0.0 {
            return;
        }
        let step = horner(monic, *root) / dp;
        if !step.is_finite() {
            return;
        }
        let candidate = *root - step;
        if horner(monic, candidate).norm() <= horner(monic, *root).norm() {
            *root = candidate;
        } else {
            return;
        }
    }
}
