//! In-place iterative radix-2 FFT.
//!
//! `core`-only replacement for a general FFT crate; grid sizes in this crate
//! are always powers of two.

use core::f64::consts::PI;

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // redundant when another crate in the build links std
use num_traits::Float;

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `X_k = Σ_j x_j e^{-2πi jk/N}`
    Forward,
    /// `x_j = Σ_k X_k e^{+2πi jk/N}` (no normalization)
    Inverse,
}

pub(crate) fn is_valid_size(n: usize) -> bool {
    n.is_power_of_two()
}

/// Transforms `data` in place. `data.len()` must be a power of two.
pub(crate) fn transform(data: &mut [Complex64], direction: Direction) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }

    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    // Twiddles are evaluated directly rather than by repeated multiplication
    // so that rounding does not accumulate with N.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let angle = sign * 2.0 * PI * (k as f64) / (n as f64);
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let ang = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    acc + v * Complex64::new(ang.cos(), ang.sin())
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 8, 64] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            transform(&mut y, Direction::Forward);
            let z = naive(&x, -1.0);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).norm() < 1e-12 * n as f64);
            }
            let mut w = x.clone();
            transform(&mut w, Direction::Inverse);
            let z = naive(&x, 1.0);
            for (a, b) in w.iter().zip(&z) {
                assert!((a - b).norm() < 1e-12 * n as f64);
            }
        }
    }
}
