//! Finite-stencil convolution operators and their symbols.
//!
//! An operator acts as `(Q u)_j = sum_{l=-r}^{p} a_l u_{j+l}` and has symbol
//! `Q(kappa) = sum_l a_l kappa^l`. A scheme is the pair `(Q0, Q1)` defining
//! `L = Q1^{-1} Q0`, whose amplification factor is `F = Q0 / Q1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::profile::{GreenProfile, ProfileMeta};

/// Relative tolerance under which `|Q1(kappa)|` is treated as a pole of `F`.
pub const SYMBOL_POLE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Laurent coefficients `a_l`, `l = -r..=p`, stored from `l = -r` upward.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionOperator {
    r: usize,
    p: usize,
    coeffs: Vec<Complex64>,
}

impl ConvolutionOperator {
    pub fn new(r: usize, p: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != r + p + 1 {
            return Err(Error::StencilLength {
                len: coeffs.len(),
                expected: r + p + 1,
            });
        }
        if coeffs.iter().all(|c| *c == ZERO) {
            return Err(Error::ZeroOperator);
        }
        Ok(ConvolutionOperator { r, p, coeffs })
    }

    /// Convenience constructor for real coefficients.
    pub fn from_real(r: usize, p: usize, coeffs: &[f64]) -> Result<Self> {
        Self::new(
            r,
            p,
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    pub fn identity() -> Self {
        ConvolutionOperator {
            r: 0,
            p: 0,
            coeffs: vec![ONE],
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient `a_l`, zero outside the stencil.
    pub fn coeff(&self, l: i64) -> Complex64 {
        if l < -(self.r as i64) || l > self.p as i64 {
            ZERO
        } else {
            self.coeffs[(l + self.r as i64) as usize]
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when the operator is the identity, whatever the zero padding.
    pub fn is_identity(&self) -> bool {
        (-(self.r as i64)..=self.p as i64).all(|l| self.coeff(l) == if l == 0 { ONE } else { ZERO })
    }

    /// Same operator written on the wider stencil `[-r, p]`.
    pub fn padded(&self, r: usize, p: usize) -> Self {
        let r = r.max(self.r);
        let p = p.max(self.p);
        let coeffs = (-(r as i64)..=p as i64).map(|l| self.coeff(l)).collect();
        ConvolutionOperator { r, p, coeffs }
    }

    /// Operator with coefficients `a_l exp(-theta l)`; it acts on `exp(theta j) u_j`
    /// the way the original acts on `u_j`.
    pub fn tilted(&self, theta: f64) -> Self {
        let coeffs = (-(self.r as i64)..=self.p as i64)
            .map(|l| self.coeff(l) * (-theta * l as f64).exp())
            .collect();
        ConvolutionOperator {
            r: self.r,
            p: self.p,
            coeffs,
        }
    }

    /// Symbol value `Q(kappa)`.
    pub fn eval(&self, kappa: Complex64) -> Result<Complex64> {
        eval_q_symbol(self, kappa)
    }

    /// Derivative `Q'(kappa) = sum_l l a_l kappa^{l-1}`.
    pub fn eval_derivative(&self, kappa: Complex64) -> Result<Complex64> {
        if kappa == ZERO && self.r > 0 {
            return Err(Error::ZeroArgument { r: self.r });
        }
        let mut acc = ZERO;
        for (i, c) in self.coeffs.iter().enumerate() {
            let l = i as i32 - self.r as i32;
            if l != 0 {
                acc += c * l as f64 * kappa.powi(l - 1);
            }
        }
        Ok(acc)
    }
}

/// Evaluates `Q(kappa)` by Horner's rule on `kappa^r Q(kappa)`, then divides by `kappa^r`.
pub fn eval_q_symbol(op: &ConvolutionOperator, kappa: Complex64) -> Result<Complex64> {
    if kappa == ZERO && op.r > 0 {
        return Err(Error::ZeroArgument { r: op.r });
    }
    let mut acc = ZERO;
    for c in op.coeffs.iter().rev() {
        acc = acc * kappa + c;
    }
    if op.r == 0 {
        Ok(acc)
    } else {
        Ok(acc / kappa.powi(op.r as i32))
    }
}

/// The pair `(Q0, Q1)` on a common minimal stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemePair {
    pub name: String,
    q0: ConvolutionOperator,
    q1: ConvolutionOperator,
}

impl SchemePair {
    /// Pads both operators to a common stencil, then trims end positions where
    /// both tables vanish so that `(r, p)` is minimal.
    pub fn new(
        name: impl Into<String>,
        q0: ConvolutionOperator,
        q1: ConvolutionOperator,
    ) -> Result<Self> {
        let r = q0.r.max(q1.r) as i64;
        let p = q0.p.max(q1.p) as i64;
        let both_zero = |l: i64| q0.coeff(l) == ZERO && q1.coeff(l) == ZERO;
        let mut lo = -r;
        while lo < 0 && both_zero(lo) {
            lo += 1;
        }
        let mut hi = p;
        while hi > 0 && both_zero(hi) {
            hi -= 1;
        }
        let rr = (-lo) as usize;
        let pp = hi as usize;
        let take = |op: &ConvolutionOperator| -> Result<ConvolutionOperator> {
            ConvolutionOperator::new(rr, pp, (lo..=hi).map(|l| op.coeff(l)).collect())
        };
        Ok(SchemePair {
            name: name.into(),
            q0: take(&q0)?,
            q1: take(&q1)?,
        })
    }

    pub fn q0(&self) -> &ConvolutionOperator {
        &self.q0
    }

    pub fn q1(&self) -> &ConvolutionOperator {
        &self.q1
    }

    pub fn r(&self) -> usize {
        self.q0.r
    }

    pub fn p(&self) -> usize {
        self.q0.p
    }

    /// True when `Q1` is the identity.
    pub fn is_explicit(&self) -> bool {
        self.q1.is_identity()
    }

    /// Scale for relative tolerances.
    pub fn coeff_scale(&self) -> f64 {
        self.q0.max_abs_coeff().max(self.q1.max_abs_coeff())
    }

    /// Both operators tilted by `exp(-theta l)`; the resulting scheme propagates
    /// `exp(theta j) G_j`.
    pub fn tilted(&self, theta: f64) -> SchemePair {
        SchemePair {
            name: format!("{} (tilt {theta})", self.name),
            q0: self.q0.tilted(theta),
            q1: self.q1.tilted(theta),
        }
    }

    /// Derivative `F'(kappa)`.
    pub fn eval_f_derivative(&self, kappa: Complex64) -> Result<Complex64> {
        let q1 = self.q1.eval(kappa)?;
        let q0 = self.q0.eval(kappa)?;
        let d0 = self.q0.eval_derivative(kappa)?;
        let d1 = self.q1.eval_derivative(kappa)?;
        Ok((d0 * q1 - q0 * d1) / (q1 * q1))
    }
}

/// Amplification factor `F(kappa) = Q0(kappa) / Q1(kappa)`.
pub fn eval_f(pair: &SchemePair, kappa: Complex64) -> Result<Complex64> {
    let q1 = pair.q1.eval(kappa)?;
    let m = kappa.norm();
    let scale = pair.q1.max_abs_coeff() * m.powi(pair.p() as i32).max(m.powi(-(pair.r() as i32)));
    if q1.norm() < SYMBOL_POLE_TOL * scale {
        return Err(Error::SymbolPole {
            kappa,
            modulus: q1.norm(),
        });
    }
    Ok(pair.q0.eval(kappa)? / q1)
}

/// `A_l(z) = z a_{l,1} - a_{l,0}`.
pub fn coeff_a(pair: &SchemePair, l: i64, z: Complex64) -> Result<Complex64> {
    if l < -(pair.r() as i64) || l > pair.p() as i64 {
        return Err(Error::IndexOutOfStencil {
            index: l,
            r: pair.r(),
            p: pair.p(),
        });
    }
    Ok(z * pair.q1.coeff(l) - pair.q0.coeff(l))
}

/// Winding number of `Q(e^{i xi})` around the origin from the accumulated
/// argument on `samples` uniform points.
pub fn winding_number(op: &ConvolutionOperator, samples: usize) -> Result<i64> {
    let samples = samples.max(8);
    let values: Vec<Complex64> = (0..samples)
        .map(|k| {
            let xi = 2.0 * PI * k as f64 / samples as f64;
            eval_q_symbol(op, Complex64::from_polar(1.0, xi))
        })
        .collect::<Result<_>>()?;
    let min_modulus = values
        .iter()
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min);
    if min_modulus < SYMBOL_POLE_TOL * op.max_abs_coeff() {
        return Err(Error::ZeroOnCircle { min_modulus });
    }
    let mut total = 0.0;
    let mut largest_step: f64 = 0.0;
    for k in 0..samples {
        let step = (values[(k + 1) % samples] / values[k]).arg();
        largest_step = largest_step.max(step.abs());
        total += step;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    let residual = (turns - rounded).abs();
    // A step of more than a quarter turn means the argument may have jumped a branch.
    if residual >= 0.25 || largest_step > PI / 2.0 {
        return Err(Error::AmbiguousWinding {
            residual: residual.max(largest_step / (2.0 * PI)),
        });
    }
    Ok(rounded as i64)
}

/// Laurent coefficients `phi_l` of `F`, so that `(L u)_j = sum_l phi_l u_{j+l}`.
///
/// For explicit schemes the table of `Q0` is returned unchanged. Otherwise `F`
/// is sampled on `2^m` points of the unit circle and inverted by FFT, doubling
/// the grid until the aliasing estimate drops below `tol / 10`; the half-width
/// is the smallest one whose geometric tail estimate is below `tol`.
pub fn rational_kernel(pair: &SchemePair, tol: f64, max_half_width: usize) -> Result<GreenProfile> {
    let meta = ProfileMeta {
        source: "rational_kernel".into(),
        z: None,
        n: None,
        scheme: pair.name.clone(),
    };
    if pair.is_explicit() {
        let r = pair.r() as i64;
        let values = (-r..=pair.p() as i64).map(|l| pair.q0.coeff(l)).collect();
        return Ok(GreenProfile::new(-r, values, meta));
    }
    const MAX_LOG2: u32 = 24;
    let mut log2 = 10;
    let mut coarse = fourier_coefficients(pair, 1 << log2)?;
    loop {
        if log2 >= MAX_LOG2 {
            return Err(Error::TailNotResolved {
                tol,
                half_width: max_half_width,
            });
        }
        log2 += 1;
        let fine = fourier_coefficients(pair, 1 << log2)?;
        let quarter = (1usize << (log2 - 1)) / 4;
        let aliasing = (0..quarter)
            .flat_map(|l| [l as i64, -(l as i64)])
            .map(|l| (coeff_at(&coarse, l) - coeff_at(&fine, l)).norm())
            .fold(0.0, f64::max);
        if aliasing < tol / 10.0 {
            let limit = max_half_width.min(fine.len() / 4);
            for half in 1..=limit {
                let tail: f64 = [1i64, -1]
                    .iter()
                    .map(|&side| {
                        let last = coeff_at(&fine, side * half as i64).norm();
                        let prev = coeff_at(&fine, side * (half as i64 - 1)).norm();
                        geometric_tail(last, prev, tol)
                    })
                    .sum();
                if tail < tol {
                    let h = half as i64;
                    let values = (-h..=h).map(|l| coeff_at(&fine, l)).collect();
                    return Ok(GreenProfile::new(-h, values, meta));
                }
            }
            return Err(Error::TailNotResolved {
                tol,
                half_width: max_half_width,
            });
        }
        coarse = fine;
    }
}

fn geometric_tail(last: f64, prev: f64, tol: f64) -> f64 {
    if last <= 1e-3 * tol {
        last
    } else if last < prev {
        let q = last / prev;
        last * q / (1.0 - q)
    } else {
        f64::INFINITY
    }
}

fn coeff_at(table: &[Complex64], l: i64) -> Complex64 {
    let n = table.len() as i64;
    table[l.rem_euclid(n) as usize]
}

fn fourier_coefficients(pair: &SchemePair, size: usize) -> Result<Vec<Complex64>> {
    let mut buf: Vec<Complex64> = (0..size)
        .map(|k| {
            eval_f(
                pair,
                Complex64::from_polar(1.0, 2.0 * PI * k as f64 / size as f64),
            )
        })
        .collect::<Result<_>>()?;
    let fft = FftPlanner::new().plan_fft_forward(size);
    fft.process(&mut buf);
    let inv = 1.0 / size as f64;
    buf.iter_mut().for_each(|v| *v *= inv);
    Ok(buf)
}
