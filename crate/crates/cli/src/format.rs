//! JSON and CSV file formats.

use std::fmt::Write as _;

use invcurve_core::transversality::{AffineFamily, Contour, ExponentialFamily};
use invcurve_core::{Complex64, FiberPolynomial, FiberedMap, PeriodicFunction};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

pub fn complex_json(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(pair: [f64; 2], what: &str) -> Result<Complex64, CliError> {
    if !pair[0].is_finite() || !pair[1].is_finite() {
        return Err(CliError::Schema(format!("{what}: non-finite value {pair:?}")));
    }
    Ok(Complex64::new(pair[0], pair[1]))
}

/// Fourier coefficients ordered `n = −N/2, …, N/2 − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicJson {
    pub n_modes: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl PeriodicJson {
    pub fn from_function(f: &PeriodicFunction) -> Self {
        Self {
            n_modes: f.grid_size(),
            coeffs: f.centered().into_iter().map(complex_json).collect(),
        }
    }

    pub fn to_function(&self, what: &str) -> Result<PeriodicFunction, CliError> {
        if self.coeffs.len() != self.n_modes {
            return Err(CliError::Schema(format!(
                "{what}: n_modes = {} but {} coefficients given",
                self.n_modes,
                self.coeffs.len()
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| complex(c, what))
            .collect::<Result<Vec<_>, _>>()?;
        PeriodicFunction::from_centered(&coeffs).map_err(|e| CliError::Schema(format!("{what}: {e}")))
    }

    /// Reads the function onto a grid of `size`, refusing to drop nonzero modes.
    pub fn to_function_on(&self, size: usize, what: &str) -> Result<PeriodicFunction, CliError> {
        let f = self.to_function(what)?;
        let g = f.resample(size).map_err(|e| CliError::Schema(format!("{what}: {e}")))?;
        let kept: f64 = g.modes().map(|(_, c)| c.norm_sqr()).sum();
        let all: f64 = f.modes().map(|(_, c)| c.norm_sqr()).sum();
        if kept != all {
            return Err(CliError::Schema(format!(
                "{what}: grid {size} would drop nonzero modes of a {}-point function",
                f.grid_size()
            )));
        }
        Ok(g)
    }
}

/// `f(θ, z) = ρ₀ + (e^{2πiβ} + ρ₁)z + Σ_{k≥2} ρ_k z^k` over `θ ↦ θ + α`.
///
/// `rho_k` lists `ρ₂, …, ρ_D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub alpha: f64,
    pub beta: f64,
    pub domain_radius: f64,
    #[serde(rename = "degree_D")]
    pub degree: usize,
    pub rho0: PeriodicJson,
    pub rho1: PeriodicJson,
    #[serde(default)]
    pub rho_k: Vec<PeriodicJson>,
}

impl MapJson {
    pub fn from_map(f: &FiberedMap) -> Self {
        let rho = f.rho_all();
        Self {
            alpha: f.alpha,
            beta: f.beta,
            domain_radius: f.domain_radius,
            degree: f.degree(),
            rho0: PeriodicJson::from_function(&rho[0]),
            rho1: PeriodicJson::from_function(&rho[1]),
            rho_k: rho[2..].iter().map(PeriodicJson::from_function).collect(),
        }
    }

    pub fn grid_size(&self) -> usize {
        self.rho0.n_modes
    }

    /// Builds the map on a grid of `size` (the file's own grid if `None`).
    pub fn to_map(&self, size: Option<usize>) -> Result<FiberedMap, CliError> {
        let expected = 1 + self.rho_k.len();
        if self.degree != expected.max(1) {
            return Err(CliError::Schema(format!(
                "degree_D = {} but rho_k holds {} coefficients (degree {expected})",
                self.degree,
                self.rho_k.len()
            )));
        }
        let size = size.unwrap_or(self.grid_size());
        let mut rho = vec![
            self.rho0.to_function_on(size, "rho0")?,
            self.rho1.to_function_on(size, "rho1")?,
        ];
        for (k, c) in self.rho_k.iter().enumerate() {
            rho.push(c.to_function_on(size, &format!("rho_k[{k}]"))?);
        }
        Ok(FiberedMap::new(self.alpha, self.beta, rho, self.domain_radius)?)
    }
}

/// A one-parameter family `s ↦ f_s` of a built-in shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyJson {
    /// `f_s = e^{s − s₀}·f`.
    Exponential {
        map: MapJson,
        #[serde(default)]
        s0: [f64; 2],
    },
    /// `f_s = f + s·Σ_k g_k z^k`, with `direction` listing `g_0, g_1, …`.
    Affine { map: MapJson, direction: Vec<PeriodicJson> },
}

pub enum Family {
    Exponential(ExponentialFamily),
    Affine(AffineFamily),
}

impl FamilyJson {
    pub fn map(&self) -> &MapJson {
        match self {
            FamilyJson::Exponential { map, .. } | FamilyJson::Affine { map, .. } => map,
        }
    }

    pub fn to_family(&self) -> Result<Family, CliError> {
        match self {
            FamilyJson::Exponential { map, s0 } => Ok(Family::Exponential(ExponentialFamily {
                base: map.to_map(None)?,
                s0: complex(*s0, "s0")?,
            })),
            FamilyJson::Affine { map, direction } => {
                let base = map.to_map(None)?;
                if direction.is_empty() {
                    return Err(CliError::Schema("direction needs at least one coefficient".into()));
                }
                let coeffs = direction
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c.to_function_on(base.grid_size(), &format!("direction[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Family::Affine(AffineFamily {
                    base,
                    direction: FiberPolynomial::new(coeffs)?,
                }))
            }
        }
    }
}

pub fn contour_json(c: &Contour) -> Value {
    match *c {
        Contour::Circle { center, radius } => json!({
            "shape": "circle",
            "center": complex_json(center),
            "radius": radius,
        }),
        Contour::Sector {
            center,
            r_in,
            r_out,
            phi0,
            phi1,
        } => json!({
            "shape": "sector",
            "center": complex_json(center),
            "r_in": r_in,
            "r_out": r_out,
            "phi0": phi0,
            "phi1": phi1,
        }),
    }
}

/// Rows `θ_j, Re f(θ_j), Im f(θ_j)` with 17 significant digits.
pub fn samples_csv(f: &PeriodicFunction) -> String {
    let n = f.grid_size();
    let mut out = String::from("theta,re,im\n");
    for (j, z) in f.samples().iter().enumerate() {
        let theta = j as f64 / n as f64;
        writeln!(out, "{theta:.16e},{:.16e},{:.16e}", z.re, z.im).unwrap();
    }
    out
}

/// One row per certificate mode.
pub fn certificate_csv(modes: &[i64], divisors: &[f64], forcing: &[f64], solution: &[f64]) -> String {
    let mut out = String::from("n,divisor,forcing_coeff,solution_coeff\n");
    for i in 0..modes.len() {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            modes[i], divisors[i], forcing[i], solution[i]
        )
        .unwrap();
    }
    out
}
