//! Fibered holomorphic maps `(θ, z) ↦ (θ + α, f(θ, z))` whose fiber maps are
//! polynomials in `z` with periodic coefficients.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when another crate in the build links std
use num_traits::Float;

use crate::cohomology::solve_classical;
use crate::error::{Error, Result};
use crate::periodic::{unit, PeriodicFunction};

/// `|Im 𝓘| ≤ INDIFFERENCE_TOL` declares a curve indifferent.
pub const INDIFFERENCE_TOL: f64 = 1e-8;

/// Invariance residual accepted by [`FiberedMap::normal_form`].
pub const NORMAL_FORM_TOL: f64 = 1e-8;

/// `Σ_k c_k(θ) z^k` with coefficients on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPolynomial {
    coeffs: Vec<PeriodicFunction>,
}

fn falling(k: usize, order: usize) -> f64 {
    (k + 1 - order..=k).map(|j| j as f64).product()
}

fn binomial(k: usize, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, j| acc * (k - j) as f64 / (j + 1) as f64)
}

impl FiberPolynomial {
    pub fn new(coeffs: Vec<PeriodicFunction>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::InvalidArgument("fiber polynomial needs a coefficient".into()));
        };
        let size = first.grid_size();
        if let Some(bad) = coeffs.iter().find(|c| c.grid_size() != size) {
            return Err(Error::GridMismatch {
                left: size,
                right: bad.grid_size(),
            });
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(size: usize, degree: usize) -> Result<Self> {
        Self::new(alloc::vec![PeriodicFunction::zeros(size)?; degree + 1])
    }

    pub fn coeffs(&self) -> &[PeriodicFunction] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn grid_size(&self) -> usize {
        self.coeffs[0].grid_size()
    }

    /// `θ ↦ ∂_z^order p(θ, u(θ)) + [order ≤ 1]·∂_z^order(linear·z)`.
    fn eval_plus_linear(&self, order: usize, u: &PeriodicFunction, linear: Complex64) -> Result<PeriodicFunction> {
        let mut inputs: Vec<&PeriodicFunction> = Vec::with_capacity(self.coeffs.len() + 1);
        inputs.push(u);
        inputs.extend(self.coeffs.iter());
        let degree = self.degree();
        PeriodicFunction::combine(&inputs, |v| {
            let z = v[0];
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (order..=degree).rev() {
                acc = acc * z + v[k + 1] * falling(k, order);
            }
            match order {
                0 => acc + linear * z,
                1 => acc + linear,
                _ => acc,
            }
        })
    }

    /// `θ ↦ ∂_z^order p(θ, u(θ))`, evaluated on the doubled grid.
    pub fn eval(&self, order: usize, u: &PeriodicFunction) -> Result<PeriodicFunction> {
        self.eval_plus_linear(order, u, Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|f| f.scale(c)).collect(),
        }
    }
}

/// A fibered map over `θ ↦ θ + α` with fiber map
/// `f(θ, z) = ρ₀(θ) + (λ + ρ₁(θ))z + Σ_{k≥2} ρ_k(θ)z^k`, `λ = e^{2πiβ}`,
/// on the disk `|z| < domain_radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberedMap {
    pub alpha: f64,
    pub beta: f64,
    /// `ρ₀, ρ₁, ρ₂, …, ρ_D`.
    rho: FiberPolynomial,
    pub domain_radius: f64,
}

impl FiberedMap {
    /// `rho` lists `ρ₀, ρ₁, …, ρ_D` and needs at least `ρ₀, ρ₁`.
    pub fn new(alpha: f64, beta: f64, rho: Vec<PeriodicFunction>, domain_radius: f64) -> Result<Self> {
        if rho.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least rho0 and rho1, got {} coefficients",
                rho.len()
            )));
        }
        if !(domain_radius > 0.0) {
            return Err(Error::InvalidArgument(format!("domain radius {domain_radius}")));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha = {alpha}, beta = {beta}")));
        }
        Ok(Self {
            alpha,
            beta,
            rho: FiberPolynomial::new(rho)?,
            domain_radius,
        })
    }

    /// The model map `z ↦ λz` with zero coefficients up to `degree`.
    pub fn model(alpha: f64, beta: f64, size: usize, degree: usize, domain_radius: f64) -> Result<Self> {
        let degree = degree.max(1);
        Self::new(
            alpha,
            beta,
            alloc::vec![PeriodicFunction::zeros(size)?; degree + 1],
            domain_radius,
        )
    }

    pub fn lambda(&self) -> Complex64 {
        unit(self.beta)
    }

    pub fn grid_size(&self) -> usize {
        self.rho.grid_size()
    }

    pub fn degree(&self) -> usize {
        self.rho.degree()
    }

    /// `ρ_k` for `k = 0, …, D`.
    pub fn rho(&self, k: usize) -> Option<&PeriodicFunction> {
        self.rho.coeffs.get(k)
    }

    pub fn rho_all(&self) -> &[PeriodicFunction] {
        &self.rho.coeffs
    }

    /// `f` as a polynomial, with `λ` folded into the linear coefficient.
    pub fn full_polynomial(&self) -> FiberPolynomial {
        let mut p = self.rho.clone();
        p.coeffs[1] = p.coeffs[1].add_constant(self.lambda());
        p
    }

    /// `f(θ, z)` at a single point, for inspection and oracles.
    pub fn value_at(&self, theta: f64, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for rho in self.rho.coeffs.iter().rev() {
            let value: Complex64 = rho.modes().map(|(n, c)| c * unit(n as f64 * theta)).sum();
            acc = acc * z + value;
        }
        acc + self.lambda() * z
    }

    /// Fails unless the curve stays inside the fiber disk.
    pub fn check_domain(&self, u: &PeriodicFunction) -> Result<()> {
        if u.grid_size() != self.grid_size() {
            return Err(Error::GridMismatch {
                left: self.grid_size(),
                right: u.grid_size(),
            });
        }
        let sup = u
            .samples_on(2 * u.grid_size())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !(sup < self.domain_radius) {
            return Err(Error::OutsideDomain {
                sup,
                radius: self.domain_radius,
            });
        }
        Ok(())
    }

    /// `θ ↦ ∂_z^order f(θ, u(θ))`.
    pub fn eval(&self, order: usize, u: &PeriodicFunction) -> Result<PeriodicFunction> {
        self.check_domain(u)?;
        self.rho.eval_plus_linear(order, u, self.lambda())
    }

    /// `c·f`, as a map with the same `β`.
    pub fn scale(&self, c: Complex64) -> Self {
        let mut rho = self.rho.scale(c);
        rho.coeffs[1] = rho.coeffs[1].add_constant((c - 1.0) * self.lambda());
        Self { rho, ..self.clone() }
    }

    /// `(1/2πi)∫ log f'(θ, u(θ)) dθ` with the real part reduced to `[0, 1)`.
    ///
    /// The imaginary part is `−(1/2π)∫ log|f'|`, zero for indifferent curves.
    pub fn rotation_number_integral(&self, u: &PeriodicFunction) -> Result<Complex64> {
        let value = self.log_multiplier_mean(u)? / Complex64::new(0.0, 2.0 * PI);
        Ok(Complex64::new(value.re - value.re.floor(), value.im))
    }

    /// `∫ log f'(θ, u(θ)) dθ` on the continuous branch with `Im` at `θ = 0`
    /// in `(−π, π]`.
    pub fn log_multiplier_mean(&self, u: &PeriodicFunction) -> Result<Complex64> {
        Ok(self.eval(1, u)?.log_nonvanishing()?.mean())
    }

    /// `Θ = e^t f(·, u) − u(·+α)`.
    pub fn invariance_defect(&self, u: &PeriodicFunction, t: Complex64) -> Result<PeriodicFunction> {
        let f = self.eval(0, u)?;
        Ok(&f.scale(t.exp()) - &u.rotate(self.alpha))
    }

    /// `‖e^t f(·, u) − u(·+α)‖₀`.
    pub fn invariance_residual(&self, u: &PeriodicFunction, t: Complex64) -> Result<f64> {
        Ok(self.invariance_defect(u, t)?.c0_norm())
    }

    /// `f̃(θ, z) = m·f(θ, z/m)`, for which `m·u` is invariant iff `u` is
    /// invariant for `f`.
    pub fn rescale(&self, m: f64) -> Result<Self> {
        if !(m >= 1.0) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!("rescale factor {m} < 1")));
        }
        let coeffs = self
            .rho
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * m.powi(1 - k as i32))
            .collect();
        Ok(Self {
            rho: FiberPolynomial { coeffs },
            domain_radius: m * self.domain_radius,
            ..self.clone()
        })
    }

    /// Conjugates by `H(θ, z) = (θ, u₀(θ) + u₁(θ)z)` around the invariant,
    /// indifferent curve `u₀`, where `u₁` solves
    /// `e^{2πiβ}u₁(θ+α) = f'(θ, u₀(θ))u₁(θ)`.
    ///
    /// The result has `ρ₀ = ρ₁ = 0` up to the invariance defect of `u₀` and
    /// quadrature error, and keeps the higher-order terms.
    pub fn normal_form(&self, u0: &PeriodicFunction, delta_min: f64) -> Result<(Self, PeriodicFunction)> {
        let residual = self.invariance_residual(u0, Complex64::new(0.0, 0.0))?;
        if residual > NORMAL_FORM_TOL {
            return Err(Error::Precondition {
                detail: format!("u0 is not invariant: residual {residual:e}"),
            });
        }
        let log_fp = self.eval(1, u0)?.log_nonvanishing()?;
        let rot = log_fp.mean() / Complex64::new(0.0, 2.0 * PI);
        let winding = rot.re - self.beta;
        if rot.im.abs() > INDIFFERENCE_TOL || (winding - winding.round()).abs() > INDIFFERENCE_TOL {
            return Err(Error::Precondition {
                detail: format!("rotation integral {rot} does not match beta = {}", self.beta),
            });
        }
        let forcing = log_fp.add_constant(-log_fp.mean());
        let u1 = solve_classical(&forcing, self.alpha, delta_min)?.psi.exp();

        let u1_shift = u1.rotate(self.alpha);
        let u0_shift = u0.rotate(self.alpha);
        let full = self.full_polynomial();
        let degree = self.degree();
        let mut coeffs = Vec::with_capacity(degree + 1);
        for m in 0..=degree {
            // g_m = f^{(m)}(θ, u₀) u₁^m / (m! u₁(θ+α)), from the Taylor shift.
            let mut inputs: Vec<&PeriodicFunction> = alloc::vec![u0, &u1, &u1_shift, &u0_shift];
            inputs.extend(full.coeffs.iter());
            let g = PeriodicFunction::combine(&inputs, |v| {
                let (z0, a, b) = (v[0], v[1], v[2]);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in (m..=degree).rev() {
                    acc = acc * z0 + v[k + 4] * binomial(k, m);
                }
                let mut g = acc * a.powu(m as u32);
                if m == 0 {
                    g -= v[3];
                }
                g / b
            })?;
            coeffs.push(g);
        }
        coeffs[1] = coeffs[1].add_constant(-self.lambda());

        let sup = |f: &PeriodicFunction| {
            f.samples_on(2 * f.grid_size())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        };
        let radius = (self.domain_radius - sup(u0)) / sup(&u1);
        let conj = Self::new(self.alpha, self.beta, coeffs, radius)?;
        Ok((conj, u1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{solve_twisted, DEFAULT_DELTA_MIN};
    use crate::test_util::*;

    fn random_map(seed: u64, size: usize, degree: usize, amplitude: f64) -> FiberedMap {
        let mut r = rng(seed);
        let rho = (0..=degree).map(|_| random_function(&mut r, size, amplitude)).collect();
        FiberedMap::new(GOLDEN, 0.5, rho, 2.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = FiberedMap::model(GOLDEN, 0.3, 16, 3, 1.0).unwrap();
        let u = random_function(&mut rng(1), 16, 0.5);
        let d = f.eval(1, &u).unwrap();
        assert!((&d - &PeriodicFunction::constant(16, unit(0.3)).unwrap()).c0_norm() < 1e-15);

        let one = PeriodicFunction::constant(16, c(1.0, 0.0)).unwrap();
        let zero = PeriodicFunction::zeros(16).unwrap();
        let mut rho = alloc::vec![zero.clone(); 3];
        rho[2] = one;
        let f = FiberedMap::new(GOLDEN, 0.3, rho, 1.0).unwrap();
        assert!((f.eval(2, &zero).unwrap().mean() - c(2.0, 0.0)).norm() < 1e-15);

        let g = random_map(2, 16, 3, 0.1);
        assert!((&g.eval(0, &zero).unwrap() - g.rho(0).unwrap()).c0_norm() < 1e-15);

        let far = PeriodicFunction::constant(16, c(3.0, 0.0)).unwrap();
        assert!(matches!(g.eval(0, &far), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn eval_matches_pointwise_values() {
        // Wide grid so that the degree-4 composition is fully resolved.
        let f = random_map(3, 256, 4, 0.2);
        let u = random_function(&mut rng(4), 256, 0.6);
        let values = f.eval(0, &u).unwrap().samples();
        for (j, u_j) in u.samples().iter().enumerate().step_by(7) {
            let theta = j as f64 / 256.0;
            assert!((values[j] - f.value_at(theta, *u_j)).norm() < 1e-12);
        }
    }

    #[test]
    fn z_derivative_matches_finite_difference() {
        let h = 1e-5;
        for seed in 0..5 {
            let f = random_map(10 + seed, 32, 4, 0.2);
            let u = random_function(&mut rng(20 + seed), 32, 0.5);
            let up = u.add_constant(c(h, 0.0));
            let dn = u.add_constant(c(-h, 0.0));
            let fd = &(&f.eval(0, &up).unwrap() - &f.eval(0, &dn).unwrap()) * (0.5 / h);
            assert!((&fd - &f.eval(1, &u).unwrap()).c0_norm() < 1e-8);
            let fd2 = &(&f.eval(1, &up).unwrap() - &f.eval(1, &dn).unwrap()) * (0.5 / h);
            assert!((&fd2 - &f.eval(2, &u).unwrap()).c0_norm() < 1e-8);
        }
    }

    #[test]
    fn rotation_integral_examples() {
        let zero = PeriodicFunction::zeros(16).unwrap();
        let f = FiberedMap::model(GOLDEN, 0.3, 16, 2, 1.0).unwrap();
        assert!((f.rotation_number_integral(&zero).unwrap() - c(0.3, 0.0)).norm() < 1e-14);
        let g = f.scale(c(2.0, 0.0));
        let expected = c(0.3, -(2f64).ln() / (2.0 * PI));
        assert!((g.rotation_number_integral(&zero).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn affine_invariant_curve() {
        let (alpha, beta) = (GOLDEN, 0.5);
        let a = random_function(&mut rng(5), 64, 0.05);
        let zero = PeriodicFunction::zeros(64).unwrap();
        let f = FiberedMap::new(alpha, beta, alloc::vec![a.clone(), zero.clone()], 1.0).unwrap();
        let u = solve_twisted(&a, alpha, beta, DEFAULT_DELTA_MIN).unwrap().psi;
        let t0 = c(0.0, 0.0);
        assert!(f.invariance_residual(&u, t0).unwrap() <= 1e-9);
        assert!(f.invariance_residual(&zero, t0).unwrap() > 0.0);

        // The defect is linear in a perturbation of the curve.
        let bump = PeriodicFunction::mode(64, 1, c(1.0, 0.0)).unwrap();
        let r1 = f.invariance_residual(&(&u + &(&bump * 1e-4)), t0).unwrap();
        let r2 = f.invariance_residual(&(&u + &(&bump * 2e-4)), t0).unwrap();
        assert!((r2 / r1 - 2.0).abs() < 1e-6);

        let (conj, u1) = f.normal_form(&u, DEFAULT_DELTA_MIN).unwrap();
        assert!((&u1 - &PeriodicFunction::constant(64, c(1.0, 0.0)).unwrap()).c0_norm() < 1e-12);
        assert!(conj.rho_all().iter().all(|r| r.c0_norm() < 1e-8));
    }

    #[test]
    fn normal_form_of_model_is_trivial() {
        let f = FiberedMap::model(GOLDEN, 0.5, 16, 2, 1.0).unwrap();
        let zero = PeriodicFunction::zeros(16).unwrap();
        let (conj, u1) = f.normal_form(&zero, DEFAULT_DELTA_MIN).unwrap();
        assert_eq!(conj.rho_all(), f.rho_all());
        assert!((u1.mean() - c(1.0, 0.0)).norm() < 1e-15 && u1.c0_norm() - 1.0 < 1e-15);
    }

    #[test]
    fn normal_form_rejects_non_invariant_curve() {
        let f = random_map(6, 16, 2, 0.01);
        let zero = PeriodicFunction::zeros(16).unwrap();
        assert!(matches!(
            f.normal_form(&zero, DEFAULT_DELTA_MIN),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn normal_form_with_multiplier_and_quadratic_term() {
        // f(θ, z) = λe^{g(θ+α)−g(θ)} z + q(θ) z², invariant curve u₀ = 0.
        let (alpha, beta) = (GOLDEN, 0.5);
        let g = random_mean_zero(&mut rng(7), 64, 0.1);
        let mult = (&g.rotate(alpha) - &g).exp().scale(unit(beta));
        let rho1 = mult.add_constant(-unit(beta));
        let q = random_function(&mut rng(8), 64, 0.2);
        let zero = PeriodicFunction::zeros(64).unwrap();
        let f = FiberedMap::new(alpha, beta, alloc::vec![zero.clone(), rho1, q.clone()], 1.0).unwrap();
        let (conj, u1) = f.normal_form(&zero, DEFAULT_DELTA_MIN).unwrap();
        // Oracle: u₁ = e^{g} up to a constant factor, here exactly e^{g}.
        // exp and log are truncated to 64 modes, hence the looser bound.
        assert!((&u1 - &g.exp()).c0_norm() < 1e-10);
        assert!(conj.rho(0).unwrap().c0_norm() < 1e-8);
        assert!(conj.rho(1).unwrap().c0_norm() < 1e-8);
        let expected = &q.mul(&u1.mul(&u1).unwrap()).unwrap().div(&u1.rotate(alpha)).unwrap();
        assert!((conj.rho(2).unwrap() - expected).c0_norm() < 1e-10);
        assert!(conj.rho(2).unwrap().c0_norm() > 0.1);
    }

    #[test]
    fn normal_form_composes_back() {
        let (alpha, beta) = (GOLDEN, 0.5);
        let g = random_mean_zero(&mut rng(9), 64, 0.1);
        let mult = (&g.rotate(alpha) - &g).exp().scale(unit(beta));
        let q = random_function(&mut rng(10), 64, 0.2);
        let zero = PeriodicFunction::zeros(64).unwrap();
        let f = FiberedMap::new(
            alpha,
            beta,
            alloc::vec![zero.clone(), mult.add_constant(-unit(beta)), q],
            1.0,
        )
        .unwrap();
        let (conj, u1) = f.normal_form(&zero, DEFAULT_DELTA_MIN).unwrap();
        // H(θ+α, g(θ, z)) = f(θ, H(θ, z)) along z = w(θ).
        let w = random_function(&mut rng(11), 64, 0.3);
        let lhs = conj.eval(0, &w).unwrap().mul(&u1.rotate(alpha)).unwrap();
        let rhs = f.eval(0, &u1.mul(&w).unwrap()).unwrap();
        assert!((&lhs - &rhs).c0_norm() < 1e-8);
    }

    #[test]
    fn rescale_examples() {
        let f = random_map(12, 16, 3, 0.1);
        assert_eq!(f.rescale(1.0).unwrap(), f);
        let m = 4.0;
        let g = f.rescale(m).unwrap();
        assert!((&(g.rho(2).unwrap() * m) - f.rho(2).unwrap()).c0_norm() < 1e-15);
        assert!((&(g.rho(3).unwrap() * (m * m)) - f.rho(3).unwrap()).c0_norm() < 1e-15);
        assert_eq!(g.rho(1), f.rho(1));

        let u = random_function(&mut rng(13), 16, 0.5);
        let mu = &u * m;
        let t = c(0.01, -0.02);
        let r_big = g.invariance_residual(&mu, t).unwrap();
        let r_small = f.invariance_residual(&u, t).unwrap();
        assert!((r_big / m - r_small).abs() < 1e-12 * r_small.max(1.0));
        let i_big = g.rotation_number_integral(&mu).unwrap();
        let i_small = f.rotation_number_integral(&u).unwrap();
        assert!((i_big - i_small).norm() < 1e-10);
    }
}
