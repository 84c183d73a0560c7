//! Continued fractions and small-divisor arithmetic.
//!
//! The Diophantine conditions of interest are
//!
//! - `‖nα‖ ≥ c / n^{1+τ}` for all `n ≥ 1` (the set CD(c, τ)), and
//! - `‖nα − β‖ ≥ c / |n|^{1+τ}` for all `n ≠ 0` (the pair set CD₁(c, τ)),
//!
//! where `‖x‖` is the distance from `x` to the nearest integer. Constants are
//! certified only over a finite range `1 ≤ |n| ≤ n_max`; this is a numerical
//! diagnostic, not a proof.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when another crate in the build links std
use num_traits::Float;

/// `‖nα − β‖` below this is treated as an exact resonance.
pub const RESONANCE_THRESHOLD: f64 = 1e-14;

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_z(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `nα − β` reduced to `[-1/2, 1/2]`, computed with an exact product so that
/// the result keeps full absolute accuracy for large `n`.
pub fn reduced_phase(n: i64, alpha: f64, beta: f64) -> f64 {
    let nf = n as f64;
    let hi = nf * alpha;
    let lo = libm::fma(nf, alpha, -hi);
    // Both fractional parts lie in [-1/2, 1/2] and are exact, so near a
    // resonance their difference is exact as well.
    let a = hi - hi.round();
    let b = beta - beta.round();
    let mut x = a - b;
    if x > 0.5 {
        x = (a - 0.5) - (b + 0.5);
    } else if x < -0.5 {
        x = (a + 0.5) - (b - 0.5);
    }
    let x = x + lo;
    x - x.round()
}

/// `e^{2πinα} − e^{2πiβ}`, accurate in relative terms even when tiny.
///
/// Uses `e^{ia} − e^{ib} = 2i·sin((a−b)/2)·e^{i(a+b)/2}`.
pub fn twisted_divisor(n: i64, alpha: f64, beta: f64) -> Complex64 {
    let diff = reduced_phase(n, alpha, beta);
    let sum = reduced_phase(n, alpha, -beta);
    let modulus = 2.0 * (PI * diff).sin();
    let phase = Complex64::new(0.0, PI * sum).exp();
    // The two reductions may pick different integer shifts of nα; each shift
    // by one flips the sign of the half-angle factors, so fix it up.
    let shift = ((n as f64 * alpha - beta - diff) - (n as f64 * alpha + beta - sum)).round() as i64;
    let sign = if shift.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, sign * modulus) * phase
}

/// `e^{2πinα} − 1`.
pub fn classical_divisor(n: i64, alpha: f64) -> Complex64 {
    twisted_divisor(n, alpha, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    /// Partial quotients `a₁, a₂, …` of `x = [0; a₁, a₂, …]`.
    pub quotients: Vec<u64>,
    /// Convergents `p_i / q_i`, one per quotient.
    pub convergents: Vec<(u64, u64)>,
    /// Expansion stopped because `x` is a rational number at double precision.
    pub rational: bool,
    /// Expansion stopped because the next denominator would overflow `u64`.
    pub overflow: bool,
}

/// First `k` partial quotients of `x ∈ (0, 1)`, with convergents.
///
/// Stops early and sets `rational` once a convergent reproduces `x` to
/// double precision.
pub fn continued_fraction(x: f64, k: usize) -> ContinuedFraction {
    let mut out = ContinuedFraction {
        quotients: Vec::new(),
        convergents: Vec::new(),
        rational: false,
        overflow: false,
    };
    if !(x > 0.0 && x < 1.0) || k == 0 {
        out.rational = x == 0.0;
        return out;
    }
    // p_{-1}/q_{-1} = 1/0, p_0/q_0 = 0/1
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p, mut q) = (0u64, 1u64);
    let mut rem = x;
    while out.quotients.len() < k {
        if rem <= 0.0 {
            out.rational = true;
            break;
        }
        let inv = 1.0 / rem;
        let a = inv.floor();
        if a >= u64::MAX as f64 {
            out.overflow = true;
            break;
        }
        let a_int = a as u64;
        let next = a_int
            .checked_mul(p)
            .and_then(|v| v.checked_add(p_prev))
            .zip(a_int.checked_mul(q).and_then(|v| v.checked_add(q_prev)));
        let Some((p_next, q_next)) = next else {
            out.overflow = true;
            break;
        };
        out.quotients.push(a_int);
        out.convergents.push((p_next, q_next));
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        rem = inv - a;

        let err = (x - p as f64 / q as f64).abs();
        if err <= 2.0 * f64::EPSILON * x || rem < 4.0 * f64::EPSILON {
            out.rational = true;
            break;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiophantineBound {
    /// Largest `c` with `‖nα − β‖·|n|^{1+τ} ≥ c` over the scanned range.
    pub c: f64,
    /// A mode realizing the minimum.
    pub argmin_n: i64,
    pub n_max: u64,
    pub tau: f64,
    /// Some scanned mode has `‖nα − β‖ < RESONANCE_THRESHOLD`.
    pub resonant: bool,
}

/// Best constant `c` such that `‖nα‖ ≥ c/n^{1+τ}` for `1 ≤ n ≤ n_max`.
pub fn diophantine_constant(alpha: f64, tau: f64, n_max: u64) -> DiophantineBound {
    scan(alpha, 0.0, tau, n_max, false)
}

/// Best constant `c` such that `‖nα − β‖ ≥ c/|n|^{1+τ}` for `1 ≤ |n| ≤ n_max`,
/// scanning both signs of `n`.
pub fn pair_diophantine_constant(alpha: f64, beta: f64, tau: f64, n_max: u64) -> DiophantineBound {
    scan(alpha, beta, tau, n_max, true)
}

fn scan(alpha: f64, beta: f64, tau: f64, n_max: u64, both_signs: bool) -> DiophantineBound {
    let mut best = DiophantineBound {
        c: f64::INFINITY,
        argmin_n: 0,
        n_max,
        tau,
        resonant: false,
    };
    let n_max = n_max.max(1).min(i64::MAX as u64) as i64;
    let mut visit = |n: i64| {
        let d = reduced_phase(n, alpha, beta).abs();
        if d < RESONANCE_THRESHOLD {
            best.resonant = true;
        }
        let v = d * (n.unsigned_abs() as f64).powf(1.0 + tau);
        if v < best.c {
            best.c = v;
            best.argmin_n = n;
        }
    };
    for n in 1..=n_max {
        visit(n);
        if both_signs {
            visit(-n);
        }
    }
    best
}
