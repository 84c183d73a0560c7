use num_complex::Complex64;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::periodic::PeriodicFunction;

/// (√5 − 1)/2
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random smooth function with coefficients decaying like `e^{−|n|/2}` on
/// `|n| ≤ 12`, scaled to C⁰ size about `amplitude`.
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

/// Same as [`random_function`] with the mean removed.
pub fn random_mean_zero(r: &mut ChaCha8Rng, size: usize, amplitude: f64) -> PeriodicFunction {
    let mut f = random_function(r, size, amplitude);
    f.set_coeff(0, c(0.0, 0.0)).unwrap();
    f
}
