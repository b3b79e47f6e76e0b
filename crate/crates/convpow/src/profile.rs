//! Integer-indexed complex profiles shared by the spatial and temporal layers.

use num_complex::Complex64;

/// Provenance of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMeta {
    /// Which routine produced the values.
    pub source: String,
    /// Spectral parameter z for resolvent profiles, `None` otherwise.
    pub z: Option<Complex64>,
    /// Time step count for temporal profiles, `None` otherwise.
    pub n: Option<usize>,
    /// Scheme label.
    pub scheme: String,
}

/// Values `G(j)` for `j_min <= j <= j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenProfile {
    pub j_min: i64,
    pub j_max: i64,
    pub values: Vec<Complex64>,
    pub meta: ProfileMeta,
}

impl GreenProfile {
    pub fn new(j_min: i64, values: Vec<Complex64>, meta: ProfileMeta) -> Self {
        let j_max = j_min + values.len() as i64 - 1;
        GreenProfile {
            j_min,
            j_max,
            values,
            meta,
        }
    }

    /// Value at `j`, zero outside the stored window.
    pub fn get(&self, j: i64) -> Complex64 {
        if j < self.j_min || j > self.j_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(j - self.j_min) as usize]
        }
    }

    /// Iterator over `(j, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.j_min + i as i64, *v))
    }

    /// Sub-window `[lo, hi]` clipped to the stored range.
    pub fn restrict(&self, lo: i64, hi: i64) -> GreenProfile {
        let lo = lo.max(self.j_min);
        let hi = hi.min(self.j_max);
        let values = (lo..=hi).map(|j| self.get(j)).collect();
        GreenProfile::new(lo, values, self.meta.clone())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest modulus.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norm.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sum of all values.
    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Sup-norm distance to `other` over the common window.
    pub fn sup_diff(&self, other: &GreenProfile) -> f64 {
        let lo = self.j_min.max(other.j_min);
        let hi = self.j_max.min(other.j_max);
        (lo..=hi)
            .map(|j| (self.get(j) - other.get(j)).norm())
            .fold(0.0, f64::max)
    }
}
