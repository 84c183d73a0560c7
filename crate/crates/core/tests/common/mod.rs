//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use invcurve_core::{Complex64, FiberedMap, PeriodicFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (√5 − 1)/2
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random smooth function with coefficients decaying like `e^{−|n|/2}` on
/// `|n| ≤ min(12, N/4)`, scaled to C⁰ size `amplitude`.
pub fn random_function(r: &mut ChaCha8Rng, size: usize, amplitude: f64) -> PeriodicFunction {
    let mut f = PeriodicFunction::zeros(size).unwrap();
    let top = 12.min(size as i64 / 4);
    for n in -top..=top {
        let w = (-(n.abs() as f64) / 2.0).exp();
        let v = c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * w;
        f.set_coeff(n, v).unwrap();
    }
    let norm = f.c0_norm();
    f.scale(c(amplitude / norm, 0.0))
}

pub fn random_mean_zero(r: &mut ChaCha8Rng, size: usize, amplitude: f64) -> PeriodicFunction {
    let mut f = random_function(r, size, amplitude);
    f.set_coeff(0, c(0.0, 0.0)).unwrap();
    f
}

/// Random function with algebraically decaying coefficients
/// `|f̂(n)| ~ (1+|n|)^{−decay}` on `|n| < N/4`.
pub fn random_rough(r: &mut ChaCha8Rng, size: usize, decay: f64) -> PeriodicFunction {
    let mut f = PeriodicFunction::zeros(size).unwrap();
    let top = size as i64 / 4;
    for n in -top + 1..top {
        let w = (1.0 + n.abs() as f64).powf(-decay);
        let v = c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * w;
        f.set_coeff(n, v).unwrap();
    }
    f
}

/// `λz + ε(ρ₀ + ρ₁z + ρ₂z²)` with random smooth `ρ_k` of C⁰ size `ε`.
pub fn perturbed_map(seed: u64, size: usize, eps: f64, beta: f64) -> FiberedMap {
    let mut r = rng(seed);
    let rho = (0..3).map(|_| random_function(&mut r, size, eps)).collect();
    FiberedMap::new(GOLDEN, beta, rho, 1.0).unwrap()
}
