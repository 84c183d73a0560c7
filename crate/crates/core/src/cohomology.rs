//! Series solvers for the cohomological equations over the rotation
//! `θ ↦ θ + α`.
//!
//! Two sign conventions appear and both are provided:
//!
//! | operator | equation | coefficients |
//! |---|---|---|
//! | [`solve_classical`] | `ψ(θ+α) − ψ(θ) = φ(θ)` | `φ̂(n)/(e^{2πinα} − 1)` |
//! | [`solve_twisted`] | `ψ(θ+α) − λψ(θ) = φ(θ)` | `φ̂(n)/(e^{2πinα} − λ)` |
//! | [`apply_m_alpha`] | `φ(θ) − φ(θ+α) = v(θ)` | `v̂(n)/(1 − e^{2πinα})` |
//! | [`apply_m_alpha_beta`] | `λφ(θ) − φ(θ+α) = v(θ)` | `v̂(n)/(λ − e^{2πinα})` |
//!
//! with `λ = e^{2πiβ}`. So `𝕄_α v = −solve_classical(v)` and
//! `𝕄_{α,β} v = −solve_twisted(v)`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when another crate in the build links std
use num_traits::Float;

use crate::arithmetic::{classical_divisor, reduced_phase, twisted_divisor, RESONANCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::periodic::{unit, PeriodicFunction};

/// Default lower bound on divisor moduli.
pub const DEFAULT_DELTA_MIN: f64 = 1e-12;

/// `|φ̂(0)| ≤ MEAN_TOLERANCE·‖φ‖₀` counts as mean zero.
pub const MEAN_TOLERANCE: f64 = 1e-10;

/// Minimum ratio between consecutive certificate coefficients.
pub const BLOWUP_FACTOR: f64 = 10.0;

/// What to do with a mode whose divisor is below `delta_min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivisorPolicy {
    /// Fail with [`Error::SmallDivisor`].
    #[default]
    Abort,
    /// Set the mode to zero and record it in `dropped_modes`.
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohomologySolution {
    pub psi: PeriodicFunction,
    /// Smallest divisor modulus over the modes with a nonzero coefficient.
    pub min_divisor: f64,
    pub dropped_modes: Vec<i64>,
    /// `ψ̂(0)` was fixed to zero (classical equation only).
    pub mean_normalized: bool,
}

/// Divides mode `n` by `divisor(n)`; `None` means the mode is set to zero.
fn divide(
    v: &PeriodicFunction,
    divisor: impl Fn(i64) -> Option<Complex64>,
    delta_min: f64,
    policy: DivisorPolicy,
) -> Result<(PeriodicFunction, f64, Vec<i64>)> {
    if !(delta_min >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("delta_min = {delta_min}")));
    }
    let mut min_divisor = f64::INFINITY;
    let mut small = Vec::new();
    // Modes with a zero coefficient stay zero whatever their divisor.
    let mut out = v.map_modes(|n, c| match divisor(n) {
        None => Complex64::new(0.0, 0.0),
        Some(_) if c == Complex64::new(0.0, 0.0) => c,
        Some(d) => {
            let m = d.norm();
            min_divisor = min_divisor.min(m);
            if m < delta_min || m == 0.0 {
                small.push(n);
                Complex64::new(0.0, 0.0)
            } else {
                c / d
            }
        }
    });
    if !small.is_empty() {
        small.sort_by_key(|n| (n.abs(), *n));
        if policy == DivisorPolicy::Abort {
            return Err(Error::SmallDivisor {
                modes: small,
                min_divisor,
            });
        }
        for &n in &small {
            out.set_coeff(n, Complex64::new(0.0, 0.0))?;
        }
    }
    Ok((out, min_divisor, small))
}

fn check_mean_zero(phi: &PeriodicFunction) -> Result<()> {
    let mean = phi.mean();
    if mean.norm() > MEAN_TOLERANCE * phi.c0_norm() {
        return Err(Error::MeanObstruction { mean });
    }
    Ok(())
}

/// Solves `ψ(θ+α) − ψ(θ) = φ(θ)` with `ψ̂(0) = 0`.
pub fn solve_classical(phi: &PeriodicFunction, alpha: f64, delta_min: f64) -> Result<CohomologySolution> {
    solve_classical_with(phi, alpha, delta_min, DivisorPolicy::Abort)
}

pub fn solve_classical_with(
    phi: &PeriodicFunction,
    alpha: f64,
    delta_min: f64,
    policy: DivisorPolicy,
) -> Result<CohomologySolution> {
    check_mean_zero(phi)?;
    let (psi, min_divisor, dropped_modes) = divide(
        phi,
        |n| (n != 0).then(|| classical_divisor(n, alpha)),
        delta_min,
        policy,
    )?;
    Ok(CohomologySolution {
        psi,
        min_divisor,
        dropped_modes,
        mean_normalized: true,
    })
}

/// Solves `ψ(θ+α) − e^{2πiβ}ψ(θ) = φ(θ)`. Every mode, including the mean, is
/// determined.
pub fn solve_twisted(phi: &PeriodicFunction, alpha: f64, beta: f64, delta_min: f64) -> Result<CohomologySolution> {
    solve_twisted_with(phi, alpha, beta, delta_min, DivisorPolicy::Abort)
}

pub fn solve_twisted_with(
    phi: &PeriodicFunction,
    alpha: f64,
    beta: f64,
    delta_min: f64,
    policy: DivisorPolicy,
) -> Result<CohomologySolution> {
    let (psi, min_divisor, dropped_modes) = divide(phi, |n| Some(twisted_divisor(n, alpha, beta)), delta_min, policy)?;
    Ok(CohomologySolution {
        psi,
        min_divisor,
        dropped_modes,
        mean_normalized: false,
    })
}

/// `𝕄_α v`: the mean-zero `φ` with `φ(θ) − φ(θ+α) = v(θ)`.
pub fn apply_m_alpha(v: &PeriodicFunction, alpha: f64) -> Result<PeriodicFunction> {
    apply_m_alpha_with(v, alpha, DEFAULT_DELTA_MIN)
}

pub fn apply_m_alpha_with(v: &PeriodicFunction, alpha: f64, delta_min: f64) -> Result<PeriodicFunction> {
    Ok(-&solve_classical(v, alpha, delta_min)?.psi)
}

/// `𝕄_{α,β} v`: the `φ` with `e^{2πiβ}φ(θ) − φ(θ+α) = v(θ)`.
pub fn apply_m_alpha_beta(v: &PeriodicFunction, alpha: f64, beta: f64) -> Result<PeriodicFunction> {
    apply_m_alpha_beta_with(v, alpha, beta, DEFAULT_DELTA_MIN)
}

pub fn apply_m_alpha_beta_with(
    v: &PeriodicFunction,
    alpha: f64,
    beta: f64,
    delta_min: f64,
) -> Result<PeriodicFunction> {
    Ok(m_alpha_beta(v, alpha, beta, delta_min)?.0)
}

/// `𝕄_{α,β} v` together with the smallest divisor used.
pub(crate) fn m_alpha_beta(
    v: &PeriodicFunction,
    alpha: f64,
    beta: f64,
    delta_min: f64,
) -> Result<(PeriodicFunction, f64)> {
    let (phi, min_divisor, _) = divide(
        v,
        |n| Some(-twisted_divisor(n, alpha, beta)),
        delta_min,
        DivisorPolicy::Abort,
    )?;
    Ok((phi, min_divisor))
}

/// `‖ψ(·+α) − ψ − φ‖₀`.
pub fn classical_residual(psi: &PeriodicFunction, phi: &PeriodicFunction, alpha: f64) -> Result<f64> {
    twisted_residual(psi, phi, alpha, 0.0)
}

/// `‖ψ(·+α) − e^{2πiβ}ψ − φ‖₀`.
pub fn twisted_residual(psi: &PeriodicFunction, phi: &PeriodicFunction, alpha: f64, beta: f64) -> Result<f64> {
    let lhs = &psi.rotate(alpha) - &psi.scale(unit(beta));
    if lhs.grid_size() != phi.grid_size() {
        return Err(Error::GridMismatch {
            left: lhs.grid_size(),
            right: phi.grid_size(),
        });
    }
    Ok((&lhs - phi).c0_norm())
}

/// Growth data for the formal solution of `a(θ) + e^{2πiβ}u(θ) = u(θ+α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleCertificate {
    /// Selected modes, increasing in `|n|`.
    pub modes: Vec<i64>,
    /// `|e^{2πinα} − e^{2πiβ}|` at each mode.
    pub divisors: Vec<f64>,
    /// `|â(n)|` at each mode.
    pub forcing_coeffs: Vec<f64>,
    /// `|û(n)| = |â(n)| / divisor`.
    pub solution_coeffs: Vec<f64>,
    /// `‖a‖_r` measured on the grid.
    pub cr_norm: f64,
}

impl LiouvilleCertificate {
    /// Ratios of consecutive solution coefficients.
    pub fn growth_ratios(&self) -> Vec<f64> {
        self.solution_coeffs.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleForcing {
    pub forcing: PeriodicFunction,
    pub certificate: LiouvilleCertificate,
}

struct Candidate {
    n: i64,
    divisor: f64,
    /// Solution coefficient for unit `ε`, before the norm scaling.
    weight: f64,
}

/// Modes `0 < |n| ≤ scan_bound` with `10⁻¹⁴ ≤ ‖nα − β‖ < (1+|n|)^{−(r+3)}`,
/// by `|n|`.
fn near_resonant(alpha: f64, beta: f64, r: u32, scan_bound: u64) -> Vec<Candidate> {
    let mut out = Vec::new();
    for m in 1..=scan_bound as i64 {
        for n in [m, -m] {
            let size = (1.0 + m as f64).powi(-(r as i32 + 3));
            let gap = reduced_phase(n, alpha, beta).abs();
            // Below the threshold the pair is resonant in double precision,
            // which says nothing about Liouville behavior.
            if gap >= size || gap < RESONANCE_THRESHOLD {
                continue;
            }
            let divisor = twisted_divisor(n, alpha, beta).norm();
            let weight = (1.0 + m as f64).powi(-(r as i32 + 2)) / divisor;
            out.push(Candidate { n, divisor, weight });
        }
    }
    out
}

/// Longest chain with strictly increasing `|n|` and weights growing by at
/// least [`BLOWUP_FACTOR`] at each step.
fn longest_chain(cands: &[Candidate]) -> Vec<usize> {
    let mut len = alloc::vec![1usize; cands.len()];
    let mut prev = alloc::vec![usize::MAX; cands.len()];
    for i in 0..cands.len() {
        for j in 0..i {
            if cands[j].n.abs() < cands[i].n.abs()
                && cands[i].weight >= BLOWUP_FACTOR * cands[j].weight
                && len[j] + 1 > len[i]
            {
                len[i] = len[j] + 1;
                prev[i] = j;
            }
        }
    }
    let Some(mut i) = (0..cands.len()).max_by_key(|&i| (len[i], usize::MAX - i)) else {
        return Vec::new();
    };
    let mut chain = Vec::new();
    loop {
        chain.push(i);
        if prev[i] == usize::MAX {
            break;
        }
        i = prev[i];
    }
    chain.reverse();
    chain
}

/// Number of modes in the best certificate chain for `(α, β)`.
pub fn liouville_chain_length(alpha: f64, beta: f64, r: u32, scan_bound: u64) -> usize {
    longest_chain(&near_resonant(alpha, beta, r, scan_bound)).len()
}

/// Builds a forcing `a` with `‖a‖_r ≤ ε`, supported on near-resonant modes,
/// whose formal solution of `a + e^{2πiβ}u = u(·+α)` has coefficients
/// growing by at least [`BLOWUP_FACTOR`] from mode to mode.
///
/// Uses at most `k_modes` modes with `|n| ≤ scan_bound`.
pub fn liouville_forcing(
    alpha: f64,
    beta: f64,
    epsilon: f64,
    r: u32,
    k_modes: usize,
    scan_bound: u64,
) -> Result<LiouvilleForcing> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("epsilon = {epsilon}")));
    }
    let empty = |size| -> Result<LiouvilleForcing> {
        Ok(LiouvilleForcing {
            forcing: PeriodicFunction::zeros(size)?,
            certificate: LiouvilleCertificate {
                modes: Vec::new(),
                divisors: Vec::new(),
                forcing_coeffs: Vec::new(),
                solution_coeffs: Vec::new(),
                cr_norm: 0.0,
            },
        })
    };
    if epsilon == 0.0 || k_modes == 0 {
        return empty(8);
    }
    let cands = near_resonant(alpha, beta, r, scan_bound);
    if cands.is_empty() {
        return Err(Error::NotLiouvilleAtScale { scan_bound });
    }
    let mut chain = longest_chain(&cands);
    chain.truncate(k_modes);
    let chosen: Vec<&Candidate> = chain.iter().map(|&i| &cands[i]).collect();

    // Coefficient-space bound on ‖a‖_r for the unscaled profile.
    let profile = |n: i64| (1.0 + n.abs() as f64).powi(-(r as i32 + 2));
    let bound: f64 = chosen
        .iter()
        .map(|c| {
            let k = 2.0 * core::f64::consts::PI * c.n.abs() as f64;
            profile(c.n) * (0..=r).map(|i| k.powi(i as i32)).sum::<f64>()
        })
        .sum();
    let scale = epsilon / bound.max(1.0);

    let top = chosen.iter().map(|c| c.n.unsigned_abs() as usize).max().unwrap_or(0);
    let size = (2 * (top + 1)).next_power_of_two().max(8).max(4 * r as usize);
    let mut forcing = PeriodicFunction::zeros(size)?;
    let mut cert = LiouvilleCertificate {
        modes: Vec::new(),
        divisors: Vec::new(),
        forcing_coeffs: Vec::new(),
        solution_coeffs: Vec::new(),
        cr_norm: 0.0,
    };
    for c in &chosen {
        let coeff = scale * profile(c.n);
        forcing.set_coeff(c.n, Complex64::new(coeff, 0.0))?;
        cert.modes.push(c.n);
        cert.divisors.push(c.divisor);
        cert.forcing_coeffs.push(coeff);
        cert.solution_coeffs.push(coeff / c.divisor);
    }
    cert.cr_norm = forcing.cr_seminorm(r)?;
    if cert.cr_norm > epsilon * (1.0 + 1e-12) {
        return Err(Error::Precondition {
            detail: alloc::format!("forcing has C^{r} norm {} > epsilon = {epsilon}", cert.cr_norm),
        });
    }
    Ok(LiouvilleForcing {
        forcing,
        certificate: cert,
    })
}

/// `x = [0; a₁, a₂, …]` evaluated from the tail.
fn from_quotients(quotients: &[u64]) -> f64 {
    quotients.iter().rev().fold(0.0, |x, &a| 1.0 / (a as f64 + x))
}

/// Searches a fixed family of pairs for the longest certificate chain.
///
/// `α` runs over continued fractions whose first quotients are drawn from a
/// ladder of sizes, and `β = ±(Σ q_j)α mod 1` over subsets of the convergent
/// denominators `q_j ≤ scan_bound`. Each such `β` sits exponentially close to
/// several `nα` at once, and is shifted by a small offset so that no mode is
/// resonant in double precision. Returns `(α, β, chain length)`.
pub fn construct_liouville_pair(r: u32, scan_bound: u64) -> (f64, f64, usize) {
    const LADDER: [u64; 8] = [1, 2, 5, 30, 300, 10_000, 1_000_000, 100_000_000];
    const OFFSETS: [f64; 4] = [1e-13, 1e-11, 1e-9, 1e-7];
    let mut best = (0.0, 0.0, 0usize);
    for code in 0..LADDER.len().pow(4) {
        let mut quotients = Vec::with_capacity(10);
        let mut c = code;
        for _ in 0..4 {
            quotients.push(LADDER[c % LADDER.len()]);
            c /= LADDER.len();
        }
        quotients.extend_from_slice(&[1_000_000, 1, 1_000_000, 1]);
        let alpha = from_quotients(&quotients);

        let (mut q_prev, mut q) = (0u64, 1u64);
        let mut dens = Vec::new();
        for &a in &quotients {
            let next = a.saturating_mul(q).saturating_add(q_prev);
            q_prev = q;
            q = next;
            if q <= scan_bound {
                dens.push(q);
            }
        }
        dens.dedup();
        for subset in 1u32..(1 << dens.len().min(8)) {
            let sum: u64 = dens
                .iter()
                .enumerate()
                .filter(|(i, _)| subset >> i & 1 == 1)
                .map(|(_, d)| d)
                .sum();
            for sign in [1i64, -1] {
                // An exact multiple of α is resonant, so β is nudged off it.
                for offset in OFFSETS {
                    let phase = reduced_phase(sign * sum as i64, alpha, 0.0) + offset;
                    let beta = phase - phase.floor();
                    let len = liouville_chain_length(alpha, beta, r, scan_bound);
                    if len > best.2 {
                        best = (alpha, beta, len);
                    }
                }
            }
        }
    }
    best
}
