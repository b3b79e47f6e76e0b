//! Composite Gauss-Legendre quadrature with panel doubling.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const ORDER: usize = 16;
/// Panels used by the first estimate.
pub const INITIAL_PANELS: usize = 4;
/// Default cap on the number of panels.
pub const MAX_PANELS: usize = 1 << 12;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite<F>(&self, f: &F, a: f64, b: f64, panels: usize) -> Result<Complex64>
    where
        F: Fn(f64) -> Result<Complex64>,
    {
        let h = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += f(mid + 0.5 * h * x)? * *w;
            }
        }
        Ok(acc * (0.5 * h))
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over `[a, b]`, doubling the panel count until two successive
/// estimates differ by less than `tol * (1 + |estimate|)`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let rule = GaussLegendre::new(ORDER);
    let mut panels = INITIAL_PANELS;
    let mut prev = rule.composite(&f, a, b, panels)?;
    loop {
        panels *= 2;
        if panels > max_panels {
            return Err(Error::QuadratureStalled { panels: panels / 2 });
        }
        let next = rule.composite(&f, a, b, panels)?;
        if (next - prev).norm() < tol * (1.0 + next.norm()) {
            return Ok(next);
        }
        prev = next;
    }
}
