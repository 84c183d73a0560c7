//! Invariant curves of fibered holomorphic maps over irrational circle rotations.
//!
//! A fibered holomorphic map is a skew product `(θ, z) ↦ (θ + α, f(θ, z))` on
//! `𝕋¹ × ℂ`. This crate computes smooth invariant curves `u: 𝕋¹ → ℂ` with a
//! prescribed transversal rotation number `β`, using
//!
//! - continued-fraction and small-divisor arithmetic ([`arithmetic`]),
//! - truncated Fourier series on the circle ([`periodic`]),
//! - series solvers for the classical and twisted cohomological equations
//!   ([`cohomology`]),
//! - polynomial-in-`z` fiber maps with rotation-number and normal-form
//!   calculus ([`fibered`]),
//! - a Newton iteration whose linear step is inverted in closed form
//!   ([`newton`]),
//! - a Kronecker-index search for the parameter of a one-parameter family
//!   at which no rotation-number correction is needed ([`transversality`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod arithmetic;
pub mod cohomology;
mod error;
mod fft;
pub mod fibered;
pub mod newton;
pub mod periodic;
pub mod transversality;

#[cfg(test)]
pub(crate) mod test_util;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use fibered::{FiberPolynomial, FiberedMap};
pub use newton::{CurveSolution, NewtonOptions, SolveReport};
pub use periodic::PeriodicFunction;
