//! Newton iteration for invariant curves with prescribed transversal
//! rotation number.
//!
//! Given `f` and `β`, find `t ∈ ℂ` and `u: 𝕋¹ → ℂ` with
//!
//! ```text
//! Θ(f, u) = e^t f(θ, u(θ)) − u(θ + α) = 0,   t = 2πiβ − ∫ log f'(θ, u(θ)) dθ.
//! ```
//!
//! `t` is a function of `u`, so only `u` is iterated. The linearization in `u`
//! (with `t` moving along) is inverted in closed form: conjugating by the
//! solution `u₁` of `e^t f'(θ, u) = e^{2πiβ} u₁(θ+α)/u₁(θ)` turns it into the
//! twisted operator `𝕄_{α,β}` plus a rank-one term.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when another crate in the build links std
use num_traits::Float;

use crate::cohomology::{m_alpha_beta, solve_classical, DEFAULT_DELTA_MIN};
use crate::error::{Error, Result};
use crate::fibered::FiberedMap;
use crate::periodic::PeriodicFunction;

/// Tolerance on `|𝓘(e^t f, u) − β|` after convergence.
pub const ROTATION_TOL: f64 = 1e-8;

/// Smallest `|1 − ∫(f''/f')u₁𝕄_{α,β}(f̃)|` accepted by [`linearized_solve`].
pub const MIN_DENOMINATOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Cutoffs `t_n ≥ 1` for smoothing the `n`-th update; the last entry is
    /// reused once the schedule runs out.
    pub smoothing_schedule: Option<Vec<f64>>,
    pub delta_min: f64,
    pub damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_iter: 50,
            smoothing_schedule: None,
            delta_min: DEFAULT_DELTA_MIN,
            damping: 1.0,
        }
    }
}

impl NewtonOptions {
    /// Enables smoothing with `t_n = min(t₀κⁿ, cap)`.
    pub fn with_geometric_smoothing(mut self, t0: f64, kappa: f64, cap: f64) -> Self {
        let mut schedule = Vec::with_capacity(self.max_iter.max(1));
        let mut t = t0;
        for _ in 0..self.max_iter.max(1) {
            schedule.push(t.min(cap));
            t *= kappa;
        }
        self.smoothing_schedule = Some(schedule);
        self
    }

    /// The default schedule for grid size `N`: `t₀ = N/8`, `κ = 1.3`, cap `N/2`.
    pub fn with_default_smoothing(self, size: usize) -> Self {
        let n = size as f64;
        self.with_geometric_smoothing(n / 8.0, 1.3, n / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidArgument(format!("tol_residual = {}", self.tol_residual)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping = {} not in (0, 1]",
                self.damping
            )));
        }
        if !(self.delta_min >= 0.0) {
            return Err(Error::InvalidArgument(format!("delta_min = {}", self.delta_min)));
        }
        if let Some(s) = &self.smoothing_schedule {
            if s.is_empty() || s.iter().any(|&t| !(t >= 1.0)) || s.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidArgument(
                    "smoothing schedule must be nonempty, nondecreasing and >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    fn cutoff(&self, iteration: usize) -> Option<f64> {
        let s = self.smoothing_schedule.as_ref()?;
        Some(s[iteration.min(s.len() - 1)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub t_final: Complex64,
    /// `‖Θ‖₀` at every iterate, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub min_divisor_seen: f64,
    /// Newton steps taken.
    pub iterations: usize,
    pub converged: bool,
    /// `𝓘(e^t f, u)` at the final iterate.
    pub rotation_number: Complex64,
    /// Winding degree of `θ ↦ f'(θ, u(θ))` at the final iterate.
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSolution {
    pub t: Complex64,
    pub u: PeriodicFunction,
    pub report: SolveReport,
}

/// `t = 2πiβ − ∫ log f'(θ, u(θ)) dθ`, with `Im t` reduced to `(−π, π]`.
///
/// The reduction changes `t` by a multiple of `2πi`, which leaves `e^t`
/// alone and shifts the rotation number by an integer.
pub fn compute_t(map: &FiberedMap, u: &PeriodicFunction, beta: f64) -> Result<Complex64> {
    let t = Complex64::new(0.0, 2.0 * PI * beta) - map.log_multiplier_mean(u)?;
    let turns = (t.im / (2.0 * PI)).round();
    let mut im = t.im - 2.0 * PI * turns;
    if im <= -PI {
        im += 2.0 * PI;
    }
    Ok(Complex64::new(t.re, im))
}

/// `u₁ = e^{ũ₁}` with `ũ₁` mean zero and
/// `ũ₁(θ+α) − ũ₁(θ) = t + log f'(θ, u(θ)) − 2πiβ`.
pub fn compute_u1(
    map: &FiberedMap,
    u: &PeriodicFunction,
    t: Complex64,
    beta: f64,
    delta_min: f64,
) -> Result<PeriodicFunction> {
    Ok(u1_with_divisor(map, u, t, beta, delta_min)?.0)
}

fn u1_with_divisor(
    map: &FiberedMap,
    u: &PeriodicFunction,
    t: Complex64,
    beta: f64,
    delta_min: f64,
) -> Result<(PeriodicFunction, f64)> {
    let rhs = map
        .eval(1, u)?
        .log_nonvanishing()?
        .add_constant(t - Complex64::new(0.0, 2.0 * PI * beta));
    // The branch of t may leave an integer multiple of 2πi in the mean.
    let turns = (rhs.mean().im / (2.0 * PI)).round();
    let rhs = rhs.add_constant(Complex64::new(0.0, -2.0 * PI * turns));
    let sol = solve_classical(&rhs, map.alpha, delta_min)?;
    Ok((sol.psi.exp(), sol.min_divisor))
}

/// `D₂Θ(f,u)Δu = e^t f(·,u)(∂_u t·Δu) + e^t f'(·,u)Δu − Δu(·+α)` with
/// `∂_u t·Δu = −∫ f''(θ,u)Δu/f'(θ,u) dθ`.
pub fn linearized_apply(
    map: &FiberedMap,
    u: &PeriodicFunction,
    t: Complex64,
    du: &PeriodicFunction,
) -> Result<PeriodicFunction> {
    let f0 = map.eval(0, u)?;
    let f1 = map.eval(1, u)?;
    let f2 = map.eval(2, u)?;
    f1.check_nonvanishing()?;
    let dt = -PeriodicFunction::combine(&[&f2, du, &f1], |v| v[0] * v[1] / v[2])?.mean();
    let et = t.exp();
    let head = PeriodicFunction::combine(&[&f0, &f1, du], |v| et * (v[0] * dt + v[1] * v[2]))?;
    Ok(&head - &du.rotate(map.alpha))
}

/// Solves `D₂Θ(f,u)Δu = Δg` for `Δu`.
///
/// `t` and `u₁` must be the ones computed at `u`, otherwise the result is
/// only an approximate inverse.
pub fn linearized_solve(
    map: &FiberedMap,
    u: &PeriodicFunction,
    t: Complex64,
    u1: &PeriodicFunction,
    dg: &PeriodicFunction,
    beta: f64,
    delta_min: f64,
) -> Result<PeriodicFunction> {
    Ok(solve_step(map, u, t, u1, dg, beta, delta_min)?.0)
}

fn solve_step(
    map: &FiberedMap,
    u: &PeriodicFunction,
    t: Complex64,
    u1: &PeriodicFunction,
    dg: &PeriodicFunction,
    beta: f64,
    delta_min: f64,
) -> Result<(PeriodicFunction, f64)> {
    let f0 = map.eval(0, u)?;
    let f1 = map.eval(1, u)?;
    let f2 = map.eval(2, u)?;
    f1.check_nonvanishing()?;
    let shifted = u1.rotate(map.alpha);
    shifted.check_nonvanishing()?;
    let et = t.exp();

    let f_tilde = PeriodicFunction::combine(&[&f0, &shifted], |v| et * v[0] / v[1])?;
    let dg_tilde = dg.div(&shifted)?;
    let (mg, d1) = m_alpha_beta(&dg_tilde, map.alpha, beta, delta_min)?;
    let (mf, d2) = m_alpha_beta(&f_tilde, map.alpha, beta, delta_min)?;
    let k = PeriodicFunction::combine(&[&f2, u1, &f1], |v| v[0] * v[1] / v[2])?;

    let denominator = Complex64::new(1.0, 0.0) - k.mul(&mf)?.mean();
    if denominator.norm() < MIN_DENOMINATOR {
        return Err(Error::IllConditioned {
            denominator: denominator.norm(),
        });
    }
    let e = -k.mul(&mg)?.mean() / denominator;
    let du = u1.mul(&(&mg - &mf.scale(e)))?;
    Ok((du, d1.min(d2)))
}

/// Distance from `𝓘` to `β`, taking the real part modulo 1.
fn rotation_error(value: Complex64, beta: f64) -> f64 {
    let d = value.re - beta;
    Complex64::new(d - d.round(), value.im).norm()
}

/// Newton iteration from `u_init`, targeting rotation number `beta`.
pub fn newton_solve(
    map: &FiberedMap,
    beta: f64,
    u_init: &PeriodicFunction,
    opts: &NewtonOptions,
) -> Result<CurveSolution> {
    opts.validate()?;
    map.check_domain(u_init)?;
    let mut u = u_init.clone();
    let mut history = Vec::new();
    let mut min_divisor = f64::INFINITY;
    let mut iteration = 0;
    loop {
        let at = |e: Error| e.at_iterate(iteration);
        let t = compute_t(map, &u, beta).map_err(at)?;
        let theta = map.invariance_defect(&u, t).map_err(at)?;
        let residual = theta.c0_norm();
        history.push(residual);
        if residual <= opts.tol_residual {
            return finish(map, beta, u, t, history, min_divisor, iteration);
        }
        if iteration >= opts.max_iter || !residual.is_finite() {
            return Err(Error::Divergence {
                iterations: iteration,
                last_residual: residual,
                residual_history: history,
            });
        }
        let (u1, d0) = u1_with_divisor(map, &u, t, beta, opts.delta_min).map_err(at)?;
        let (mut du, d1) = solve_step(map, &u, t, &u1, &-&theta, beta, opts.delta_min).map_err(at)?;
        min_divisor = min_divisor.min(d0).min(d1);
        if let Some(cut) = opts.cutoff(iteration) {
            du = du.smooth(cut).map_err(at)?;
        }
        u = &u + &(&du * opts.damping);
        iteration += 1;
    }
}

fn finish(
    map: &FiberedMap,
    beta: f64,
    u: PeriodicFunction,
    t: Complex64,
    history: Vec<f64>,
    min_divisor: f64,
    iterations: usize,
) -> Result<CurveSolution> {
    let at = |e: Error| e.at_iterate(iterations);
    let degree = map.eval(1, &u).and_then(|d| d.winding_degree()).map_err(at)?;
    let rotation_number = map.scale(t.exp()).rotation_number_integral(&u).map_err(at)?;
    if degree != 0 || rotation_error(rotation_number, beta) > ROTATION_TOL {
        return Err(Error::Precondition {
            detail: format!(
                "converged curve fails the post-check: degree {degree}, rotation integral {rotation_number}"
            ),
        }
        .at_iterate(iterations));
    }
    Ok(CurveSolution {
        t,
        u,
        report: SolveReport {
            t_final: t,
            residual_history: history,
            min_divisor_seen: min_divisor,
            iterations,
            converged: true,
            rotation_number,
            degree,
        },
    })
}
