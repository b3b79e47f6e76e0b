//! Banded LU factorization with partial pivoting.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use crate::error::{Error, Result};

/// LU factors of an `n x n` matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + ku + kl`; the extra `kl` columns hold
/// the fill-in created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factors the matrix whose entries are given by `entry(i, j)` for `|i - j|` inside the band.
    pub fn factor<F>(n: usize, kl: usize, ku: usize, entry: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Complex64,
    {
        let width = 2 * kl + ku + 1;
        let mut ab = vec![Complex64::new(0.0, 0.0); n * width];
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                let v = entry(i, j);
                scale = scale.max(v.norm());
                ab[i * width + j + kl - i] = v;
            }
        }
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            width,
            ab,
            pivots: vec![0; n],
        };
        lu.eliminate(scale)?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn eliminate(&mut self, scale: f64) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);
            let mut piv = k;
            let mut best = self.ab[self.idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.ab[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best <= 1e-14 * scale || best == 0.0 {
                return Err(Error::SolverSingular { row: k });
            }
            self.pivots[k] = piv;
            if piv != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(piv, j);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let m = self.ab[ik] / pivot;
                self.ab[ik] = m;
                if m.norm() == 0.0 {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = self.ab[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.ab[ij] -= m * kj;
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let piv = self.pivots[k];
            if piv != k {
                b.swap(k, piv);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.ab[self.idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + ku + kl).min(n - 1) {
                acc -= self.ab[self.idx(k, j)] * b[j];
            }
            b[k] = acc / self.ab[self.idx(k, k)];
        }
    }
}
