//! Smooth complex functions on the circle `𝕋¹ = ℝ/ℤ`, stored as truncated
//! Fourier series.
//!
//! A [`PeriodicFunction`] of grid size `N` holds the coefficients `f̂(n)` for
//! `n = −N/2 … N/2−1` and represents `f(θ) = Σ f̂(n) e^{2πinθ}`. Samples live
//! on the uniform grid `θ_j = j/N`.
//!
//! Nonlinear pointwise operations (products, exponentials, logarithms,
//! composition) are evaluated on the `2N` grid and truncated back to `N`
//! modes, which removes the aliasing of quadratic terms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when another crate in the build links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::{self, Direction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative modulus below which a function is considered to vanish.
const DEGENERACY_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunction {
    /// Coefficients in FFT order: index `k` holds mode `k` for `k < N/2`
    /// and mode `k − N` otherwise.
    coeffs: Vec<Complex64>,
}

/// Maps a signed mode to its FFT-order slot, if the mode is resolved.
fn slot(n: i64, size: usize) -> Option<usize> {
    let half = (size / 2) as i64;
    if n >= -half && n < half {
        Some(n.rem_euclid(size as i64) as usize)
    } else {
        None
    }
}

fn mode_of(k: usize, size: usize) -> i64 {
    if k < size / 2 {
        k as i64
    } else {
        k as i64 - size as i64
    }
}

pub(crate) fn check_size(n: usize) -> Result<()> {
    if n >= 8 && fft::is_valid_size(n) {
        Ok(())
    } else {
        Err(Error::InvalidGridSize { len: n })
    }
}

impl PeriodicFunction {
    pub fn zeros(size: usize) -> Result<Self> {
        check_size(size)?;
        Ok(Self {
            coeffs: vec![ZERO; size],
        })
    }

    pub fn constant(size: usize, value: Complex64) -> Result<Self> {
        let mut f = Self::zeros(size)?;
        f.coeffs[0] = value;
        Ok(f)
    }

    /// `amplitude · e^{2πinθ}`.
    pub fn mode(size: usize, n: i64, amplitude: Complex64) -> Result<Self> {
        let mut f = Self::zeros(size)?;
        let k = slot(n, size).ok_or_else(|| Error::Resolution {
            detail: format!("mode {n} is not resolved on a grid of {size}"),
        })?;
        f.coeffs[k] = amplitude;
        Ok(f)
    }

    /// Coefficients `f̂(n) = (1/N) Σ_j samples[j] e^{−2πinj/N}`.
    pub fn from_samples(samples: &[Complex64]) -> Result<Self> {
        check_size(samples.len())?;
        let mut coeffs = samples.to_vec();
        fft::transform(&mut coeffs, Direction::Forward);
        let scale = 1.0 / samples.len() as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        Ok(Self { coeffs })
    }

    /// Samples `g(θ_j)` of a closure on the grid.
    pub fn from_fn(size: usize, g: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_size(size)?;
        let samples: Vec<Complex64> = (0..size).map(|j| g(j as f64 / size as f64)).collect();
        Self::from_samples(&samples)
    }

    /// Builds from coefficients ordered `n = −N/2 … N/2−1`.
    pub fn from_centered(centered: &[Complex64]) -> Result<Self> {
        let size = centered.len();
        check_size(size)?;
        let half = size / 2;
        let mut coeffs = vec![ZERO; size];
        for (i, &c) in centered.iter().enumerate() {
            let n = i as i64 - half as i64;
            coeffs[slot(n, size).expect("in range")] = c;
        }
        Ok(Self { coeffs })
    }

    /// Coefficients ordered `n = −N/2 … N/2−1`.
    pub fn centered(&self) -> Vec<Complex64> {
        let half = (self.len() / 2) as i64;
        (-half..half).map(|n| self.coeff(n)).collect()
    }

    pub fn grid_size(&self) -> usize {
        self.coeffs.len()
    }

    fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// `f̂(n)`, zero for modes outside the grid.
    pub fn coeff(&self, n: i64) -> Complex64 {
        slot(n, self.len()).map_or(ZERO, |k| self.coeffs[k])
    }

    pub fn set_coeff(&mut self, n: i64, value: Complex64) -> Result<()> {
        let size = self.len();
        let k = slot(n, size).ok_or_else(|| Error::Resolution {
            detail: format!("mode {n} is not resolved on a grid of {size}"),
        })?;
        self.coeffs[k] = value;
        Ok(())
    }

    /// `(mode, coefficient)` pairs in FFT order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let size = self.len();
        self.coeffs.iter().enumerate().map(move |(k, &c)| (mode_of(k, size), c))
    }

    /// Applies `g(n, f̂(n))` to every coefficient.
    pub fn map_modes(&self, mut g: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        let size = self.len();
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| g(mode_of(k, size), c))
                .collect(),
        }
    }

    /// `∫ f dθ = f̂(0)`.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Values on the grid `θ_j = j/N`.
    pub fn samples(&self) -> Vec<Complex64> {
        let mut s = self.coeffs.clone();
        fft::transform(&mut s, Direction::Inverse);
        s
    }

    /// Values on the finer grid `θ_j = j/m`, `m ≥ N` a power of two.
    pub fn samples_on(&self, m: usize) -> Vec<Complex64> {
        debug_assert!(m >= self.len() && m.is_power_of_two());
        let mut padded = vec![ZERO; m];
        for (n, c) in self.modes() {
            padded[n.rem_euclid(m as i64) as usize] = c;
        }
        fft::transform(&mut padded, Direction::Inverse);
        padded
    }

    /// Zero-pads or truncates in coefficient space onto a grid of `size`.
    pub fn resample(&self, size: usize) -> Result<Self> {
        let mut out = Self::zeros(size)?;
        for (n, c) in self.modes() {
            if let Some(k) = slot(n, size) {
                out.coeffs[k] = c;
            }
        }
        Ok(out)
    }

    fn from_fine_samples(fine: Vec<Complex64>, size: usize) -> Self {
        let m = fine.len();
        let mut c = fine;
        fft::transform(&mut c, Direction::Forward);
        let scale = 1.0 / m as f64;
        let mut coeffs = vec![ZERO; size];
        let half = (size / 2) as i64;
        for n in -half..half {
            coeffs[n.rem_euclid(size as i64) as usize] = c[n.rem_euclid(m as i64) as usize] * scale;
        }
        Self { coeffs }
    }

    /// Evaluates `g` pointwise on the `2N` grid and truncates to `N` modes.
    pub fn map_pointwise(&self, g: impl Fn(Complex64) -> Complex64) -> Self {
        let size = self.len();
        let fine: Vec<Complex64> = self.samples_on(2 * size).into_iter().map(g).collect();
        Self::from_fine_samples(fine, size)
    }

    /// Pointwise combination of several functions of one grid size, evaluated
    /// on the `2N` grid and truncated to `N` modes.
    pub fn combine(inputs: &[&PeriodicFunction], g: impl Fn(&[Complex64]) -> Complex64) -> Result<Self> {
        let size = inputs
            .first()
            .map(|f| f.len())
            .ok_or_else(|| Error::InvalidArgument("combine needs at least one input".into()))?;
        for f in inputs {
            same_grid(size, f.len())?;
        }
        let fine: Vec<Vec<Complex64>> = inputs.iter().map(|f| f.samples_on(2 * size)).collect();
        let mut args = vec![ZERO; inputs.len()];
        let values = (0..2 * size)
            .map(|j| {
                for (a, s) in args.iter_mut().zip(&fine) {
                    *a = s[j];
                }
                g(&args)
            })
            .collect();
        Ok(Self::from_fine_samples(values, size))
    }

    /// Dealiased product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::combine(&[self, other], |v| v[0] * v[1])
    }

    /// Dealiased quotient. Fails if `other` nearly vanishes.
    pub fn div(&self, other: &Self) -> Result<Self> {
        other.check_nonvanishing()?;
        Self::combine(&[self, other], |v| v[0] / v[1])
    }

    pub fn exp(&self) -> Self {
        self.map_pointwise(|z| z.exp())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_modes(|_, v| v * c)
    }

    pub fn add_constant(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn conj(&self) -> Self {
        // conj(Σ c_n e^{2πinθ}) has coefficient conj(c_{−n}) at n.
        let size = self.len();
        let mut out = self.clone();
        for k in 0..size {
            let n = mode_of(k, size);
            out.coeffs[k] = self.coeff(-n).conj();
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `θ ↦ f(θ + α)`, exact in coefficient space.
    pub fn rotate(&self, alpha: f64) -> Self {
        self.map_modes(|n, c| c * unit(crate::arithmetic::reduced_phase(n, alpha, 0.0)))
    }

    /// Spectral derivative of the given order.
    pub fn derivative(&self, order: u32) -> Self {
        self.map_modes(|n, c| c * Complex64::new(0.0, 2.0 * PI * n as f64).powu(order))
    }

    /// Grid maximum of `|f|` (an approximation of the sup norm).
    pub fn c0_norm(&self) -> f64 {
        self.samples().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖f‖_r = Σ_{i≤r} ‖∂^i f‖₀`, with grid maxima for the `C⁰` norms.
    pub fn cr_seminorm(&self, r: u32) -> Result<f64> {
        if r as usize > self.len() / 4 {
            return Err(Error::Resolution {
                detail: format!("C^{r} seminorm needs r <= N/4 = {}", self.len() / 4),
            });
        }
        Ok((0..=r).map(|i| self.derivative(i).c0_norm()).sum())
    }

    /// Smoothing operator `S_t`: multiplies mode `n` by `η(n/t)`.
    ///
    /// The result is a trigonometric polynomial of degree below `t`.
    pub fn smooth(&self, t: f64) -> Result<Self> {
        if !(t >= 1.0) {
            return Err(Error::InvalidArgument(format!("smoothing parameter t = {t} < 1")));
        }
        Ok(self.map_modes(|n, c| c * cutoff(n as f64 / t)))
    }

    pub(crate) fn check_nonvanishing(&self) -> Result<Vec<Complex64>> {
        let samples = self.samples();
        let max = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let min = samples.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if !(min > DEGENERACY_RATIO * max) || !(min > f64::MIN_POSITIVE) {
            return Err(Error::Degenerate { min_modulus: min });
        }
        Ok(samples)
    }

    /// Winding number of `f` around `0` along the grid.
    pub fn winding_degree(&self) -> Result<i64> {
        let samples = self.check_nonvanishing()?;
        let increments = arg_increments(&samples)?;
        let total: f64 = increments.iter().sum();
        Ok((total / (2.0 * PI)).round() as i64)
    }

    /// Continuous branch `g` of `log f` with `Im g(0) ∈ (−π, π]`.
    ///
    /// Requires winding degree zero; evaluated on the `2N` grid.
    pub fn log_nonvanishing(&self) -> Result<Self> {
        let degree = self.winding_degree()?;
        if degree != 0 {
            return Err(Error::NonzeroDegree { degree });
        }
        let size = self.len();
        let fine = self.samples_on(2 * size);
        let increments = arg_increments(&fine)?;
        let mut arg = fine[0].arg();
        let mut values = Vec::with_capacity(fine.len());
        for (j, z) in fine.iter().enumerate() {
            if j > 0 {
                arg += increments[j - 1];
            }
            values.push(Complex64::new(z.norm().ln(), arg));
        }
        Ok(Self::from_fine_samples(values, size))
    }
}

fn same_grid(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::GridMismatch { left, right })
    }
}

/// `e^{2πix}`.
pub(crate) fn unit(x: f64) -> Complex64 {
    let a = 2.0 * PI * x;
    Complex64::new(a.cos(), a.sin())
}

/// Principal-branch argument increments between consecutive samples of a
/// closed loop, including the closing step. Each must be below π.
fn arg_increments(samples: &[Complex64]) -> Result<Vec<f64>> {
    let m = samples.len();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let a = samples[j];
        let b = samples[(j + 1) % m];
        let d = (b / a).arg();
        if d.abs() >= PI * (1.0 - 1e-12) {
            return Err(Error::Resolution {
                detail: format!("argument jump {d:.3} between samples {j} and {}", (j + 1) % m),
            });
        }
        out.push(d);
    }
    Ok(out)
}

/// Smooth even cutoff: `1` on `|x| ≤ 1/2`, `0` on `|x| ≥ 1`, and a
/// `C^∞` blend of `B(y) = e^{−1/y}` in between.
pub fn cutoff(x: f64) -> f64 {
    let x = x.abs();
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let b = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
        let up = b(2.0 - 2.0 * x);
        let down = b(2.0 * x - 1.0);
        up / (up + down)
    }
}

impl Add for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn add(self, rhs: &PeriodicFunction) -> PeriodicFunction {
        assert_eq!(self.len(), rhs.len(), "grid size mismatch");
        PeriodicFunction {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn sub(self, rhs: &PeriodicFunction) -> PeriodicFunction {
        assert_eq!(self.len(), rhs.len(), "grid size mismatch");
        PeriodicFunction {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn neg(self) -> PeriodicFunction {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn mul(self, rhs: Complex64) -> PeriodicFunction {
        self.scale(rhs)
    }
}

impl Mul<f64> for &PeriodicFunction {
    type Output = PeriodicFunction;
    fn mul(self, rhs: f64) -> PeriodicFunction {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{c, random_function, rng, GOLDEN};

    #[test]
    fn constant_and_pure_mode_transforms() {
        let f = PeriodicFunction::from_samples(&[c(2.0, -1.0); 8]).unwrap();
        assert!((f.coeff(0) - c(2.0, -1.0)).norm() < 1e-15);
        assert!(f.modes().filter(|&(n, _)| n != 0).all(|(_, v)| v.norm() < 1e-15));

        let g = PeriodicFunction::from_fn(8, unit).unwrap();
        assert!((g.coeff(1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(g.modes().filter(|&(n, _)| n != 1).all(|(_, v)| v.norm() < 1e-15));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(
            PeriodicFunction::from_samples(&[c(0.0, 0.0); 12]),
            Err(Error::InvalidGridSize { len: 12 })
        );
        assert!(PeriodicFunction::zeros(4).is_err());
    }

    #[test]
    fn round_trip_random_samples() {
        let mut r = rng(1);
        use rand::Rng;
        let s: Vec<Complex64> = (0..64)
            .map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
            .collect();
        let back = PeriodicFunction::from_samples(&s).unwrap().samples();
        for (a, b) in s.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn centered_order() {
        let f = PeriodicFunction::mode(8, -4, c(1.0, 0.0)).unwrap();
        assert_eq!(f.centered()[0], c(1.0, 0.0));
        let g = PeriodicFunction::from_centered(&f.centered()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rotation() {
        let f = PeriodicFunction::mode(16, 1, c(1.0, 0.0)).unwrap();
        let g = f.rotate(0.25);
        assert!((g.coeff(1) - c(0.0, 1.0)).norm() < 1e-15);
        let h = random_function(&mut rng(3), 32, 0.5);
        assert_eq!(h.rotate(0.0), h);
        let back = h.rotate(GOLDEN).rotate(-GOLDEN);
        assert!((&back - &h).c0_norm() < 1e-14);
    }

    #[test]
    fn seminorm_examples() {
        let k = PeriodicFunction::constant(16, c(0.0, -3.0)).unwrap();
        assert!((k.cr_seminorm(3).unwrap() - 3.0).abs() < 1e-13);
        let e1 = PeriodicFunction::mode(16, 1, c(1.0, 0.0)).unwrap();
        assert!((e1.cr_seminorm(1).unwrap() - (1.0 + 2.0 * PI)).abs() < 1e-12);
        let e3 = PeriodicFunction::mode(16, 3, c(1.0, 0.0)).unwrap();
        assert!((e3.cr_seminorm(0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(e3.cr_seminorm(5), Err(Error::Resolution { .. })));
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(-1.0), 0.0);
        assert!((cutoff(0.75) - 0.5).abs() < 1e-15);
        for i in 0..100 {
            let x = i as f64 / 100.0;
            assert_eq!(cutoff(x), cutoff(-x));
            assert!(cutoff(x + 0.01) <= cutoff(x));
        }
    }

    #[test]
    fn smoothing_passes_low_and_kills_high_modes() {
        let low = PeriodicFunction::mode(64, 4, c(1.0, 0.0)).unwrap();
        assert_eq!(low.smooth(8.0).unwrap(), low);
        let high = PeriodicFunction::mode(64, -8, c(1.0, 0.0)).unwrap();
        assert!(high.smooth(8.0).unwrap().c0_norm() == 0.0);
        let f = random_function(&mut rng(5), 64, 1.0);
        assert_eq!(f.smooth(1e6).unwrap(), f);
        assert!(f.smooth(0.5).is_err());
    }

    #[test]
    fn winding_examples() {
        let one = PeriodicFunction::constant(16, c(1.0, 0.0)).unwrap();
        assert_eq!(one.winding_degree().unwrap(), 0);
        let e = PeriodicFunction::from_fn(16, unit).unwrap();
        assert_eq!(e.winding_degree().unwrap(), 1);
        // Oracle: argument of e^{-4πiθ} is −4πθ, the positive factor adds nothing.
        let g = PeriodicFunction::from_fn(8, |t| unit(-2.0 * t) * (2.0 + (2.0 * PI * t).cos())).unwrap();
        assert_eq!(g.winding_degree().unwrap(), -2);
        let z = PeriodicFunction::zeros(16).unwrap();
        assert!(matches!(z.winding_degree(), Err(Error::Degenerate { .. })));
        let coarse = PeriodicFunction::from_fn(8, |t| unit(4.0 * t)).unwrap();
        assert!(matches!(coarse.winding_degree(), Err(Error::Resolution { .. })));
    }

    #[test]
    fn log_examples() {
        let lam = PeriodicFunction::constant(16, unit(0.3)).unwrap();
        let g = lam.log_nonvanishing().unwrap();
        assert!((g.coeff(0) - c(0.0, 2.0 * PI * 0.3)).norm() < 1e-14);
        assert!(g.modes().skip(1).all(|(_, v)| v.norm() < 1e-15));

        // Wide enough grid that exp(h) is resolved to rounding.
        let h = random_function(&mut rng(7), 128, 0.3);
        let back = h.exp().log_nonvanishing().unwrap();
        let shift = (back.coeff(0) - h.coeff(0)).im / (2.0 * PI);
        assert!((shift - shift.round()).abs() < 1e-10);
        let diff = &back.add_constant(c(0.0, -2.0 * PI * shift.round())) - &h;
        assert!(diff.c0_norm() < 1e-10);

        let e = PeriodicFunction::from_fn(16, unit).unwrap();
        assert_eq!(e.log_nonvanishing(), Err(Error::NonzeroDegree { degree: 1 }));
    }

    #[test]
    fn products_are_dealiased() {
        let a = PeriodicFunction::mode(16, 5, c(1.0, 0.0)).unwrap();
        let b = PeriodicFunction::mode(16, 6, c(1.0, 0.0)).unwrap();
        // Mode 11 is not resolved on N = 16, and must not alias onto −5.
        let p = a.mul(&b).unwrap();
        assert!(p.c0_norm() < 1e-14);
        let b = PeriodicFunction::mode(16, -3, c(2.0, 0.0)).unwrap();
        let p = a.mul(&b).unwrap();
        assert!((p.coeff(2) - c(2.0, 0.0)).norm() < 1e-14);
        assert!(matches!(
            a.mul(&PeriodicFunction::zeros(32).unwrap()),
            Err(Error::GridMismatch { .. })
        ));
    }
}
