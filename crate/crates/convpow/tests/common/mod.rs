#![allow(dead_code)]

use std::f64::consts::PI;

use convpow::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` points with modulus uniform in `[r_min, r_max]` and uniform argument.
pub fn annulus_samples(seed: u64, count: usize, r_min: f64, r_max: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.random_range(r_min..=r_max);
            let t = rng.random_range(-PI..PI);
            Complex64::from_polar(r, t)
        })
        .collect()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
