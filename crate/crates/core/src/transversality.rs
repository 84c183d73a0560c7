//! One-parameter families `s ↦ f_s` and the search for the parameter `s*`
//! at which the rotation-number correction `t(s)` vanishes.
//!
//! `t(s)` is the correction returned by [`newton_solve`] at `f_s`. A zero of
//! `t` inside a disk is certified by a nonzero Kronecker index of `t` along
//! the boundary, then located by index-guided subdivision and a final 2×2
//! Newton polish.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when another crate in the build links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fibered::{FiberPolynomial, FiberedMap};
use crate::newton::{compute_u1, linearized_solve, newton_solve, CurveSolution, NewtonOptions};
use crate::periodic::PeriodicFunction;

/// Below this margin a family counts as non-transversal.
pub const MIN_MARGIN: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A family of fibered maps holomorphic in `s ∈ ℂ`.
pub trait Family {
    fn map_at(&self, s: Complex64) -> Result<FiberedMap>;

    /// `∂_s f_s` as a polynomial in `z`, when known in closed form.
    fn d_s(&self, _s: Complex64) -> Option<Result<FiberPolynomial>> {
        None
    }
}

impl<F: Family + ?Sized> Family for &F {
    fn map_at(&self, s: Complex64) -> Result<FiberedMap> {
        (**self).map_at(s)
    }
    fn d_s(&self, s: Complex64) -> Option<Result<FiberPolynomial>> {
        (**self).d_s(s)
    }
}

/// `f_s = e^{s − s₀}·f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFamily {
    pub base: FiberedMap,
    pub s0: Complex64,
}

impl Family for ExponentialFamily {
    fn map_at(&self, s: Complex64) -> Result<FiberedMap> {
        Ok(self.base.scale((s - self.s0).exp()))
    }
    fn d_s(&self, s: Complex64) -> Option<Result<FiberPolynomial>> {
        Some(Ok(self.base.full_polynomial().scale((s - self.s0).exp())))
    }
}

/// `f_s = f + s·g` with `g` a polynomial in `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFamily {
    pub base: FiberedMap,
    pub direction: FiberPolynomial,
}

impl Family for AffineFamily {
    fn map_at(&self, s: Complex64) -> Result<FiberedMap> {
        let base = self.base.rho_all();
        let dir = self.direction.coeffs();
        let degree = base.len().max(dir.len());
        let zero = PeriodicFunction::zeros(self.base.grid_size())?;
        let rho = (0..degree)
            .map(|k| {
                let b = base.get(k).unwrap_or(&zero);
                match dir.get(k) {
                    Some(d) => b + &d.scale(s),
                    None => b.clone(),
                }
            })
            .collect();
        FiberedMap::new(self.base.alpha, self.base.beta, rho, self.base.domain_radius)
    }
    fn d_s(&self, _s: Complex64) -> Option<Result<FiberPolynomial>> {
        Some(Ok(self.direction.clone()))
    }
}

/// `f̃_s(θ, z) = m·f_s(θ, z/m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledFamily<F> {
    pub inner: F,
    pub m: f64,
}

fn rescale_polynomial(p: &FiberPolynomial, m: f64) -> Result<FiberPolynomial> {
    FiberPolynomial::new(
        p.coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c * m.powi(1 - k as i32))
            .collect(),
    )
}

impl<F: Family> Family for RescaledFamily<F> {
    fn map_at(&self, s: Complex64) -> Result<FiberedMap> {
        self.inner.map_at(s)?.rescale(self.m)
    }
    fn d_s(&self, s: Complex64) -> Option<Result<FiberPolynomial>> {
        Some(self.inner.d_s(s)?.and_then(|p| rescale_polynomial(&p, self.m)))
    }
}

/// A family together with its search disk `D(0, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyEvaluator<F> {
    pub family: F,
    pub radius: f64,
    /// Step for central differences in `s` when no closed form is known.
    pub fd_step: f64,
}

/// `Σ w_k p_k` coefficient-wise, padding shorter polynomials with zeros.
fn combine_polys(terms: &[(Complex64, &FiberPolynomial)]) -> Result<FiberPolynomial> {
    let len = terms.iter().map(|(_, p)| p.coeffs().len()).max().unwrap_or(1);
    let size = terms[0].1.grid_size();
    let mut out = alloc::vec![PeriodicFunction::zeros(size)?; len];
    for (w, p) in terms {
        for (k, c) in p.coeffs().iter().enumerate() {
            out[k] = &out[k] + &c.scale(*w);
        }
    }
    FiberPolynomial::new(out)
}

impl<F: Family> FamilyEvaluator<F> {
    /// Uses the default difference step `10⁻⁶·max(1, R)`.
    pub fn new(family: F, radius: f64) -> Self {
        Self {
            family,
            radius,
            fd_step: 1e-6 * radius.max(1.0),
        }
    }

    pub fn map_at(&self, s: Complex64) -> Result<FiberedMap> {
        self.family.map_at(s).map_err(|e| e.at_parameter(s))
    }

    /// `(∂f/∂x, ∂f/∂y)` at `s = x + iy`.
    pub fn partials(&self, s: Complex64) -> Result<(FiberPolynomial, FiberPolynomial)> {
        if let Some(d) = self.family.d_s(s) {
            let d = d.map_err(|e| e.at_parameter(s))?;
            let dy = d.scale(I);
            return Ok((d, dy));
        }
        let h = self.fd_step;
        let diff = |dir: Complex64| -> Result<FiberPolynomial> {
            let plus = self.map_at(s + dir * h)?.full_polynomial();
            let minus = self.map_at(s - dir * h)?.full_polynomial();
            let w = Complex64::new(0.5 / h, 0.0);
            combine_polys(&[(w, &plus), (-w, &minus)])
        };
        Ok((diff(Complex64::new(1.0, 0.0))?, diff(I)?))
    }
}

/// Solves along a path of parameters, warm-starting each solve from the
/// previous curve.
#[derive(Debug)]
pub struct TSolver<'a, F> {
    eval: &'a FamilyEvaluator<F>,
    beta: f64,
    opts: NewtonOptions,
    warm: Option<PeriodicFunction>,
    /// Number of Newton solves performed.
    pub solves: usize,
}

impl<'a, F: Family> TSolver<'a, F> {
    pub fn new(eval: &'a FamilyEvaluator<F>, beta: f64, opts: NewtonOptions) -> Self {
        Self {
            eval,
            beta,
            opts,
            warm: None,
            solves: 0,
        }
    }

    pub fn solve(&mut self, s: Complex64) -> Result<CurveSolution> {
        let map = self.eval.map_at(s)?;
        let cold = PeriodicFunction::zeros(map.grid_size()).map_err(|e| e.at_parameter(s))?;
        self.solves += 1;
        let first = match &self.warm {
            Some(w) if w.grid_size() == cold.grid_size() => newton_solve(&map, self.beta, w, &self.opts),
            _ => newton_solve(&map, self.beta, &cold, &self.opts),
        };
        let sol = match first {
            Ok(sol) => sol,
            Err(_) if self.warm.is_some() => {
                self.solves += 1;
                newton_solve(&map, self.beta, &cold, &self.opts).map_err(|e| e.at_parameter(s))?
            }
            Err(e) => return Err(e.at_parameter(s)),
        };
        self.warm = Some(sol.u.clone());
        Ok(sol)
    }

    pub fn t(&mut self, s: Complex64) -> Result<Complex64> {
        Ok(self.solve(s)?.t)
    }
}

/// `t(s)` from a cold start.
pub fn t_of_s<F: Family>(
    eval: &FamilyEvaluator<F>,
    s: Complex64,
    beta: f64,
    opts: &NewtonOptions,
) -> Result<Complex64> {
    TSolver::new(eval, beta, opts.clone()).t(s)
}

/// A closed, positively oriented curve in the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contour {
    Circle {
        center: Complex64,
        radius: f64,
    },
    /// `{center + re^{iφ} : r_in ≤ r ≤ r_out, φ0 ≤ φ ≤ φ1}`.
    Sector {
        center: Complex64,
        r_in: f64,
        r_out: f64,
        phi0: f64,
        phi1: f64,
    },
}

impl Contour {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Contour::Circle { center, radius }
    }

    /// The point at arc-length fraction `x ∈ [0, 1)`.
    pub fn point(&self, x: f64) -> Complex64 {
        match *self {
            Contour::Circle { center, radius } => center + Complex64::from_polar(radius, 2.0 * PI * x),
            Contour::Sector {
                center,
                r_in,
                r_out,
                phi0,
                phi1,
            } => {
                let span = phi1 - phi0;
                let legs = [r_out * span, r_out - r_in, r_in * span, r_out - r_in];
                let total: f64 = legs.iter().sum();
                let mut d = x * total;
                for (k, &len) in legs.iter().enumerate() {
                    if d <= len || k == 3 {
                        let f = if len > 0.0 { (d / len).min(1.0) } else { 0.0 };
                        let z = match k {
                            0 => Complex64::from_polar(r_out, phi0 + f * span),
                            1 => Complex64::from_polar(r_out - f * (r_out - r_in), phi1),
                            2 => Complex64::from_polar(r_in, phi1 - f * span),
                            _ => Complex64::from_polar(r_in + f * (r_out - r_in), phi0),
                        };
                        return center + z;
                    }
                    d -= len;
                }
                unreachable!()
            }
        }
    }

    /// Largest distance between two points of the enclosed region.
    pub fn diameter(&self) -> f64 {
        match *self {
            Contour::Circle { radius, .. } => 2.0 * radius,
            Contour::Sector {
                r_in,
                r_out,
                phi0,
                phi1,
                ..
            } => {
                let chord = 2.0 * r_out * ((phi1 - phi0) / 2.0).min(PI / 2.0).sin();
                chord
                    .max(r_out - r_in)
                    .max(if phi1 - phi0 >= PI { 2.0 * r_out } else { 0.0 })
            }
        }
    }

    pub fn center_point(&self) -> Complex64 {
        match *self {
            Contour::Circle { center, .. } => center,
            Contour::Sector {
                center,
                r_in,
                r_out,
                phi0,
                phi1,
            } => center + Complex64::from_polar((r_in + r_out) / 2.0, (phi0 + phi1) / 2.0),
        }
    }

    pub fn contains(&self, s: Complex64) -> bool {
        match *self {
            Contour::Circle { center, radius } => (s - center).norm() <= radius,
            Contour::Sector {
                center,
                r_in,
                r_out,
                phi0,
                phi1,
            } => {
                let z = s - center;
                let r = z.norm();
                let mut phi = z.arg();
                while phi < phi0 {
                    phi += 2.0 * PI;
                }
                r >= r_in && r <= r_out && (phi <= phi1 || r == 0.0)
            }
        }
    }

    /// Four sub-sectors whose boundaries, taken with orientation, add up to
    /// this contour.
    pub fn split(&self) -> [Contour; 4] {
        let (center, r_in, r_out, phi0, phi1) = match *self {
            Contour::Circle { center, radius } => (center, 0.0, radius, 0.0, 2.0 * PI),
            Contour::Sector {
                center,
                r_in,
                r_out,
                phi0,
                phi1,
            } => (center, r_in, r_out, phi0, phi1),
        };
        let sector = |a: f64, b: f64, p: f64, q: f64| Contour::Sector {
            center,
            r_in: a,
            r_out: b,
            phi0: p,
            phi1: q,
        };
        if matches!(self, Contour::Circle { .. }) {
            let q = PI / 2.0;
            return [0, 1, 2, 3].map(|k| sector(0.0, r_out, k as f64 * q, (k + 1) as f64 * q));
        }
        let r_mid = (r_in + r_out) / 2.0;
        let p_mid = (phi0 + phi1) / 2.0;
        [
            sector(r_in, r_mid, phi0, p_mid),
            sector(r_mid, r_out, phi0, p_mid),
            sector(r_in, r_mid, p_mid, phi1),
            sector(r_mid, r_out, p_mid, phi1),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexResult {
    pub index: i64,
    pub min_boundary_modulus: f64,
    pub samples: usize,
}

/// Boundary samples of `G` along a contour.
struct Samples {
    points: Vec<Complex64>,
    values: Vec<Complex64>,
}

impl Samples {
    fn take(contour: &Contour, m: usize, g: &mut impl FnMut(Complex64) -> Result<Complex64>) -> Result<Self> {
        let points: Vec<Complex64> = (0..m).map(|j| contour.point(j as f64 / m as f64)).collect();
        let values = points.iter().map(|&s| g(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self { points, values })
    }

    /// Doubles the sampling, reusing the existing values.
    fn refine(&mut self, contour: &Contour, g: &mut impl FnMut(Complex64) -> Result<Complex64>) -> Result<()> {
        let m = 2 * self.points.len();
        let mut points = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        for j in 0..self.points.len() {
            points.push(self.points[j]);
            values.push(self.values[j]);
            let s = contour.point((2 * j + 1) as f64 / m as f64);
            points.push(s);
            values.push(g(s)?);
        }
        self.points = points;
        self.values = values;
        Ok(())
    }

    fn min_modulus(&self) -> (f64, Complex64) {
        self.values.iter().zip(&self.points).map(|(v, &s)| (v.norm(), s)).fold(
            (f64::INFINITY, Complex64::new(0.0, 0.0)),
            |a, b| if b.0 < a.0 { b } else { a },
        )
    }

    /// Winding number and largest argument increment, or `None` if `G`
    /// vanishes at a sample.
    fn winding(&self) -> Option<(i64, f64)> {
        let m = self.values.len();
        let mut total = 0.0;
        let mut largest: f64 = 0.0;
        for j in 0..m {
            let (a, b) = (self.values[j], self.values[(j + 1) % m]);
            if !(a.norm() > 0.0) || !(b.norm() > 0.0) {
                return None;
            }
            let d = (b / a).arg();
            largest = largest.max(d.abs());
            total += d;
        }
        Some(((total / (2.0 * PI)).round() as i64, largest))
    }
}

fn index_of(samples: &Samples, max_step: f64) -> Result<IndexResult> {
    let (min_modulus, _) = samples.min_modulus();
    match samples.winding() {
        None => Err(Error::IndexUndefined {
            detail: "boundary sample hits a zero".into(),
            min_modulus,
        }),
        Some((_, largest)) if largest >= max_step => Err(Error::IndexUndefined {
            detail: format!(
                "argument increment {largest:.3} >= {max_step:.3} with {} samples",
                samples.points.len()
            ),
            min_modulus,
        }),
        Some((index, _)) => Ok(IndexResult {
            index,
            min_boundary_modulus: min_modulus,
            samples: samples.points.len(),
        }),
    }
}

/// Winding number of `G` along the circle `∂D(center, radius)` from
/// `m_samples` equally spaced samples, by argument summation.
pub fn kronecker_index(
    mut g: impl FnMut(Complex64) -> Result<Complex64>,
    center: Complex64,
    radius: f64,
    m_samples: usize,
) -> Result<IndexResult> {
    if m_samples < 3 || !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{m_samples} samples on radius {radius}"
        )));
    }
    let samples = Samples::take(&Contour::circle(center, radius), m_samples, &mut g)?;
    index_of(&samples, PI)
}

/// Winding number along any contour, doubling the sampling from
/// `start_samples` until every argument increment is below `π/2`.
pub fn kronecker_index_adaptive(
    mut g: impl FnMut(Complex64) -> Result<Complex64>,
    contour: &Contour,
    start_samples: usize,
    max_samples: usize,
) -> Result<IndexResult> {
    Ok(adaptive(&mut g, contour, start_samples, max_samples)?.0)
}

fn adaptive(
    g: &mut impl FnMut(Complex64) -> Result<Complex64>,
    contour: &Contour,
    start_samples: usize,
    max_samples: usize,
) -> Result<(IndexResult, Samples)> {
    let mut samples = Samples::take(contour, start_samples.max(4), g)?;
    loop {
        match index_of(&samples, PI / 2.0) {
            Ok(r) => return Ok((r, samples)),
            Err(Error::IndexUndefined { .. })
                if samples.winding().is_some() && 2 * samples.points.len() <= max_samples =>
            {
                samples.refine(contour, g)?;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Real 2×2 matrix `[[a, b], [c, d]]` of a real-linear map `ℂ → ℂ` given by
/// the images of `1` and `i`.
pub fn real_matrix(image_of_one: Complex64, image_of_i: Complex64) -> [[f64; 2]; 2] {
    [[image_of_one.re, image_of_i.re], [image_of_one.im, image_of_i.im]]
}

/// Singular values `(σ_max, σ_min)` of a real 2×2 matrix.
pub fn singular_values(m: [[f64; 2]; 2]) -> (f64, f64) {
    let s = m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2);
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
    let big = ((s + disc) / 2.0).sqrt();
    let small = if big > 0.0 { det / big } else { 0.0 };
    (big, small)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    /// `[A]_𝔏`, the smallest singular value.
    pub margin: f64,
    /// `‖A⁻¹‖ = 1/[A]_𝔏`.
    pub inverse_bound: f64,
    pub matrix: [[f64; 2]; 2],
}

/// Smallest singular value of the derivative at `s = 0` of
/// `s ↦ ∫ f'_s(θ, 0) dθ`, which equals that of `s ↦ ∫ ρ_{1,s}`.
pub fn transversality_margin<F: Family>(eval: &FamilyEvaluator<F>) -> Result<Margin> {
    let s = Complex64::new(0.0, 0.0);
    let (dx, dy) = eval.partials(s)?;
    let linear = |p: &FiberPolynomial| p.coeffs().get(1).map_or(Complex64::new(0.0, 0.0), |c| c.mean());
    let matrix = real_matrix(linear(&dx), linear(&dy));
    let (_, margin) = singular_values(matrix);
    if !(margin >= MIN_MARGIN) {
        return Err(Error::NonTransversal { margin });
    }
    Ok(Margin {
        margin,
        inverse_bound: 1.0 / margin,
        matrix,
    })
}

/// The two pieces of `Dt(s) = w(s) + A(s)`, each as the images of the
/// directions `1` and `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtDecomposition {
    /// `w·Δs = −∫ ∂_s f'(θ, u)Δs / f'(θ, u)`.
    pub w: [Complex64; 2],
    /// `A·Δs = −∫ f''(θ, u)(D_u Δs) / f'(θ, u)`, with `D_u Δs` the response
    /// of the invariant curve.
    pub a: [Complex64; 2],
}

impl DtDecomposition {
    pub fn total(&self) -> [Complex64; 2] {
        [self.w[0] + self.a[0], self.w[1] + self.a[1]]
    }
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let t = self.total();
        real_matrix(t[0], t[1])
    }
}

/// `Dt(s)` from the solution `(t, u)` at `s`, split into the direct term
/// `w` and the curve-response term `A`.
pub fn dt_decomposition<F: Family>(
    eval: &FamilyEvaluator<F>,
    s: Complex64,
    beta: f64,
    solution: &CurveSolution,
    opts: &NewtonOptions,
) -> Result<DtDecomposition> {
    let at = |e: Error| e.at_parameter(s);
    let map = eval.map_at(s)?;
    let (u, t) = (&solution.u, solution.t);
    let (dx, dy) = eval.partials(s)?;
    let f0 = map.eval(0, u).map_err(at)?;
    let f1 = map.eval(1, u).map_err(at)?;
    let f2 = map.eval(2, u).map_err(at)?;
    let u1 = compute_u1(&map, u, t, beta, opts.delta_min).map_err(at)?;
    let et = t.exp();
    let mut w = [Complex64::new(0.0, 0.0); 2];
    let mut a = [Complex64::new(0.0, 0.0); 2];
    for (k, dir) in [dx, dy].iter().enumerate() {
        let df0 = dir.eval(0, u).map_err(at)?;
        let df1 = dir.eval(1, u).map_err(at)?;
        let ratio = PeriodicFunction::combine(&[&df1, &f1], |v| v[0] / v[1]).map_err(at)?;
        w[k] = -ratio.mean();
        // D₁Θ[Δf] = e^t Δf(u) + e^t f(u)·(∂_f t·Δf), ∂_f t·Δf = w.
        let d1theta = &df0.scale(et) + &f0.scale(et * w[k]);
        let du = linearized_solve(&map, u, t, &u1, &-&d1theta, beta, opts.delta_min).map_err(at)?;
        a[k] = -PeriodicFunction::combine(&[&f2, &du, &f1], |v| v[0] * v[1] / v[2])
            .map_err(at)?
            .mean();
    }
    Ok(DtDecomposition { w, a })
}

/// `Dt(s)` by central differences of `t`, as images of `1` and `i`.
pub fn dt_finite_difference<F: Family>(
    eval: &FamilyEvaluator<F>,
    s: Complex64,
    beta: f64,
    opts: &NewtonOptions,
) -> Result<[Complex64; 2]> {
    let mut solver = TSolver::new(eval, beta, opts.clone());
    solver.solve(s)?;
    let h = eval.fd_step;
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (k, dir) in [Complex64::new(1.0, 0.0), I].iter().enumerate() {
        let plus = solver.t(s + dir * h)?;
        let minus = solver.t(s - dir * h)?;
        out[k] = (plus - minus) / (2.0 * h);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub newton: NewtonOptions,
    /// Initial boundary sampling, doubled as needed.
    pub start_samples: usize,
    pub max_samples: usize,
    /// Subdivision stops below this diameter.
    pub min_diameter: f64,
    /// Required `|t(s*)|`.
    pub tol_t: f64,
    pub max_polish_steps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            start_samples: 256,
            max_samples: 1 << 14,
            min_diameter: 1e-9,
            tol_t: 1e-8,
            max_polish_steps: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexTrace {
    pub contour: Contour,
    pub index: i64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSolution {
    pub s_star: Complex64,
    pub t_at_star: Complex64,
    pub curve: CurveSolution,
    /// Regions visited, from the root disk down.
    pub index_trace: Vec<IndexTrace>,
    pub newton_solves: usize,
}

/// Solves `t = 0` by Newton's method on `ℝ²`, with a central-difference
/// Jacobian. Returns the final parameter if `|t| ≤ tol_t` is reached
/// without leaving `region`.
fn polish<F: Family>(
    solver: &mut TSolver<'_, F>,
    start: Complex64,
    region: &Contour,
    opts: &SearchOptions,
) -> Option<Complex64> {
    let h = solver.eval.fd_step;
    let mut s = start;
    let mut t = solver.t(s).ok()?;
    for _ in 0..opts.max_polish_steps {
        if t.norm() <= opts.tol_t * 1e-4 {
            break;
        }
        let dx = (solver.t(s + h).ok()? - solver.t(s - h).ok()?) / (2.0 * h);
        let dy = (solver.t(s + I * h).ok()? - solver.t(s - I * h).ok()?) / (2.0 * h);
        let [[a, b], [c, d]] = real_matrix(dx, dy);
        let det = a * d - b * c;
        if !(det.abs() > 0.0) {
            return None;
        }
        let step = Complex64::new((d * t.re - b * t.im) / det, (-c * t.re + a * t.im) / det);
        s -= step;
        t = solver.t(s).ok()?;
        if step.norm() < 1e-15 * s.norm().max(1.0) {
            break;
        }
    }
    let slack = opts.min_diameter;
    let inside = region.contains(s) || (0..16).any(|j| (region.point(j as f64 / 16.0) - s).norm() <= slack);
    (t.norm() <= opts.tol_t && inside).then_some(s)
}

/// Locates `s*` in `D(0, R)` with `t(s*) = 0`, certified by a nonzero
/// Kronecker index of `t` on the boundary.
pub fn find_parameter<F: Family>(
    eval: &FamilyEvaluator<F>,
    beta: f64,
    opts: &SearchOptions,
) -> Result<ParameterSolution> {
    let root = Contour::circle(Complex64::new(0.0, 0.0), eval.radius);
    let mut solver = TSolver::new(eval, beta, opts.newton.clone());
    let mut trace = Vec::new();

    let (root_index, samples) = {
        let mut g = |s| solver.t(s);
        adaptive(&mut g, &root, opts.start_samples, opts.max_samples)?
    };
    trace.push(IndexTrace {
        contour: root,
        index: root_index.index,
        samples: root_index.samples,
    });
    if root_index.index == 0 {
        let (min_t, at) = samples.min_modulus();
        if min_t <= opts.tol_t {
            if let Some(s) = polish(&mut solver, at, &root, opts) {
                return conclude(&mut solver, s, trace);
            }
        }
        return Err(Error::NoZeroCertified { index: 0 });
    }

    let mut region = root;
    let mut index = root_index.index;
    loop {
        if index.abs() == 1 {
            if let Some(s) = polish(&mut solver, region.center_point(), &region, opts) {
                return conclude(&mut solver, s, trace);
            }
        }
        if region.diameter() < opts.min_diameter {
            return Err(Error::PartialCoverage {
                detail: format!(
                    "region of diameter {:e} with index {index} did not polish",
                    region.diameter()
                ),
            });
        }
        let mut chosen = None;
        let mut sum = 0;
        let mut notes = String::new();
        for child in region.split() {
            let mut g = |s| solver.t(s);
            match adaptive(&mut g, &child, opts.start_samples, opts.max_samples) {
                Ok((r, _)) => {
                    sum += r.index;
                    trace.push(IndexTrace {
                        contour: child,
                        index: r.index,
                        samples: r.samples,
                    });
                    if r.index != 0 && chosen.is_none() {
                        chosen = Some((child, r.index));
                    }
                }
                Err(Error::IndexUndefined { .. }) => {
                    // A zero on or near this boundary: start from the
                    // closest sample.
                    let samples = Samples::take(&child, opts.start_samples, &mut g).ok();
                    if let Some((_, at)) = samples.map(|s| s.min_modulus()) {
                        if let Some(s) = polish(&mut solver, at, &child, opts) {
                            return conclude(&mut solver, s, trace);
                        }
                    }
                    notes.push_str("; a child boundary was unresolved");
                }
                Err(e) => {
                    return Err(Error::PartialCoverage {
                        detail: format!("solver failed inside the disk: {e}"),
                    })
                }
            }
        }
        if sum != index && notes.is_empty() {
            return Err(Error::PartialCoverage {
                detail: format!("child indices sum to {sum}, parent index is {index}"),
            });
        }
        match chosen {
            Some((child, i)) => {
                region = child;
                index = i;
            }
            None => {
                return Err(Error::PartialCoverage {
                    detail: format!("no child region carries the index{notes}"),
                })
            }
        }
    }
}

fn conclude<F: Family>(solver: &mut TSolver<'_, F>, s: Complex64, trace: Vec<IndexTrace>) -> Result<ParameterSolution> {
    let curve = solver.solve(s)?;
    Ok(ParameterSolution {
        s_star: s,
        t_at_star: curve.t,
        curve,
        index_trace: trace,
        newton_solves: solver.solves,
    })
}

/// Norms of a family at `s = 0`, measured with `‖·‖_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyNorms {
    pub eps0: f64,
    pub eps1: f64,
    /// `Σ_{k≥2} ‖ρ_k‖_r`, a bound for `ρ` on the unit fiber disk.
    pub big_m: f64,
    /// `Σ_k ‖∂_s c_k‖_r` over both real directions.
    pub t_bound: f64,
}

pub fn measure_family<F: Family>(eval: &FamilyEvaluator<F>, r: u32) -> Result<FamilyNorms> {
    let s = Complex64::new(0.0, 0.0);
    let map = eval.map_at(s)?;
    let norm = |f: &PeriodicFunction| f.cr_seminorm(r);
    let rho = map.rho_all();
    let mut big_m = 0.0;
    for c in &rho[2..] {
        big_m += norm(c)?;
    }
    let (dx, dy) = eval.partials(s)?;
    let mut t_bound: f64 = 0.0;
    for p in [&dx, &dy] {
        let mut sum = 0.0;
        for c in p.coeffs() {
            sum += norm(c)?;
        }
        t_bound = t_bound.max(sum);
    }
    Ok(FamilyNorms {
        eps0: norm(&rho[0])?,
        eps1: norm(&rho[1])?,
        big_m,
        t_bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Instance<F> {
    pub rescaled: FamilyEvaluator<RescaledFamily<F>>,
    pub m: f64,
    /// Norms of the original family.
    pub norms: FamilyNorms,
    /// Norms after rescaling.
    pub rescaled_norms: FamilyNorms,
    /// `L = 1/[A]_𝔏` from the transversality margin.
    pub l: f64,
    /// Search radius `2·C·L·ε₁`.
    pub radius: f64,
}

/// Rescales `z` by `m = max(1, 3M/ε̄)` so that `ρ₀, ρ₁, ρ` all fall below
/// `ε̄/3`, and sets the search radius to `2·C·L·ε₁` with the working
/// constant `c_work`.
pub fn prepare_theorem1_instance<F: Family + Clone>(
    eval: &FamilyEvaluator<F>,
    eps_bar: f64,
    r: u32,
    c_work: f64,
) -> Result<Theorem1Instance<F>> {
    if !(eps_bar > 0.0) || !(c_work > 0.0) {
        return Err(Error::InvalidArgument(format!("eps_bar = {eps_bar}, C = {c_work}")));
    }
    let norms = measure_family(eval, r)?;
    let l = transversality_margin(eval)?.inverse_bound;
    let m = (3.0 * norms.big_m / eps_bar).max(1.0);
    let radius = 2.0 * c_work * l * norms.eps1;
    let rescaled = FamilyEvaluator {
        family: RescaledFamily {
            inner: eval.family.clone(),
            m,
        },
        radius,
        fd_step: 1e-6 * radius.max(1.0),
    };
    let rescaled_norms = measure_family(&rescaled, r)?;
    let third = eps_bar / 3.0 * (1.0 + 1e-12);
    if rescaled_norms.eps0 > third || rescaled_norms.eps1 > third || rescaled_norms.big_m > third {
        return Err(Error::OutOfBasin {
            detail: format!(
                "after m = {m}: eps0 = {:e}, eps1 = {:e}, M = {:e}, threshold {:e}",
                rescaled_norms.eps0,
                rescaled_norms.eps1,
                rescaled_norms.big_m,
                eps_bar / 3.0
            ),
        });
    }
    Ok(Theorem1Instance {
        rescaled,
        m,
        norms,
        rescaled_norms,
        l,
        radius,
    })
}
