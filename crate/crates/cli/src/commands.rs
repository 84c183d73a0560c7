//! Requests, their validation and execution.
//!
//! A request is the complete, parsed input of one run. Flags and problem
//! files both produce one, and the report hash is taken over its canonical
//! JSON form, so the same problem hashes the same way either route.

use std::path::Path;

use invcurve_core::arithmetic::{diophantine_constant, pair_diophantine_constant};
use invcurve_core::cohomology::{
    classical_residual, construct_liouville_pair, liouville_forcing, solve_classical, solve_twisted, twisted_residual,
    DEFAULT_DELTA_MIN,
};
use invcurve_core::newton::newton_solve;
use invcurve_core::transversality::{find_parameter, FamilyEvaluator, ParameterSolution, SearchOptions};
use invcurve_core::{CurveSolution, NewtonOptions, PeriodicFunction, SolveReport};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::format::*;
use crate::{read_json, CliError, EXIT_OK};

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_R: u32 = 2;
pub const DEFAULT_MODES: usize = 6;
pub const DEFAULT_SCAN: u64 = 255;

/// Optional overrides of the numerical tolerances. Unset entries take the
/// library defaults, and reports list the values actually used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol_residual: Option<f64>,
    pub delta_min: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol_t: Option<f64>,
}

impl Tolerances {
    fn delta_min(&self) -> f64 {
        self.delta_min.unwrap_or(DEFAULT_DELTA_MIN)
    }

    fn newton(&self) -> NewtonOptions {
        let d = NewtonOptions::default();
        NewtonOptions {
            tol_residual: self.tol_residual.unwrap_or(d.tol_residual),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            delta_min: self.delta_min(),
            ..d
        }
    }

    fn search(&self) -> SearchOptions {
        let d = SearchOptions::default();
        SearchOptions {
            newton: self.newton(),
            tol_t: self.tol_t.unwrap_or(d.tol_t),
            ..d
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquationKind {
    Classical,
    Twisted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArithRequest {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_nmax")]
    pub nmax: u64,
}

fn default_tau() -> f64 {
    1.0
}

fn default_nmax() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohomologyRequest {
    pub kind: EquationKind,
    pub phi: PeriodicJson,
    pub alpha: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiouvilleRequest {
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_r")]
    pub r: u32,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_scan")]
    pub scan_bound: u64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_r() -> u32 {
    DEFAULT_R
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

fn default_scan() -> u64 {
    DEFAULT_SCAN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRequest {
    pub map: MapJson,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub smooth: bool,
    #[serde(default)]
    pub initial: Option<PeriodicJson>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterRequest {
    pub family: FamilyJson,
    #[serde(default)]
    pub beta: Option<f64>,
    pub radius: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormRequest {
    pub map: MapJson,
    pub curve: PeriodicJson,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Request {
    CheckArith(ArithRequest),
    SolveCohomology(CohomologyRequest),
    DemoLiouville(LiouvilleRequest),
    SolveCurve(CurveRequest),
    FindParameter(ParameterRequest),
    NormalForm(NormalFormRequest),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    kind: String,
    payload: Value,
    #[serde(default)]
    grid_size: Option<usize>,
    #[serde(default)]
    tolerances: Option<Tolerances>,
}

impl Request {
    pub fn kind(&self) -> &'static str {
        match self {
            Request::CheckArith(_) => "check-arith",
            Request::SolveCohomology(_) => "solve-cohomology",
            Request::DemoLiouville(_) => "demo-liouville",
            Request::SolveCurve(_) => "solve-curve",
            Request::FindParameter(_) => "find-parameter",
            Request::NormalForm(_) => "normal-form",
        }
    }

    /// Parses `{kind, payload, grid_size, tolerances}`. The top-level grid
    /// and tolerances apply to the payload and may not repeat there.
    pub fn from_problem_file(path: &Path) -> Result<Self, CliError> {
        let problem: ProblemFile = read_json(path)?;
        Self::from_problem(problem.kind, problem.payload, problem.grid_size, problem.tolerances)
    }

    fn from_problem(
        kind: String,
        mut payload: Value,
        grid_size: Option<usize>,
        tolerances: Option<Tolerances>,
    ) -> Result<Self, CliError> {
        let Some(fields) = payload.as_object_mut() else {
            return Err(CliError::Schema("payload must be a JSON object".into()));
        };
        if let Some(t) = tolerances {
            if fields.contains_key("tolerances") {
                return Err(CliError::Schema(
                    "tolerances given both at top level and in payload".into(),
                ));
            }
            fields.insert("tolerances".into(), serde_json::to_value(t).unwrap());
        }
        if kind == "solve-curve" {
            if let Some(g) = grid_size {
                match fields.get("grid") {
                    Some(v) if v != &json!(g) => {
                        return Err(CliError::Schema(format!(
                            "grid_size {g} conflicts with payload grid {v}"
                        )));
                    }
                    _ => {
                        fields.insert("grid".into(), json!(g));
                    }
                }
            }
        }
        let wrapped = json!({ "kind": kind, "payload": payload });
        let request: Request = serde_json::from_value(wrapped).map_err(|source| CliError::Json {
            path: "payload".into(),
            source,
        })?;
        if let (Some(g), Some(own)) = (grid_size, request.grid_size()) {
            if g != own {
                return Err(CliError::Schema(format!("grid_size {g} but the input grid is {own}")));
            }
        }
        Ok(request)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn input_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("requests serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Grid on which the computation runs.
    pub fn grid_size(&self) -> Option<usize> {
        match self {
            Request::CheckArith(_) => None,
            Request::SolveCohomology(r) => Some(r.phi.n_modes),
            Request::DemoLiouville(_) => None,
            Request::SolveCurve(r) => Some(r.grid.unwrap_or(r.map.grid_size())),
            Request::FindParameter(r) => Some(r.family.map().grid_size()),
            Request::NormalForm(r) => Some(r.map.grid_size()),
        }
    }

    /// Every tolerance the run depends on, with defaults filled in.
    pub fn tolerances(&self) -> Value {
        match self {
            Request::CheckArith(r) => json!({
                "tau": r.tau,
                "nmax": r.nmax,
                "resonance_threshold": invcurve_core::arithmetic::RESONANCE_THRESHOLD,
            }),
            Request::SolveCohomology(r) => json!({
                "delta_min": r.tolerances.delta_min(),
                "mean_tolerance": invcurve_core::cohomology::MEAN_TOLERANCE,
            }),
            Request::DemoLiouville(r) => json!({
                "epsilon": r.epsilon,
                "r": r.r,
                "modes": r.modes,
                "scan_bound": r.scan_bound,
                "blowup_factor": invcurve_core::cohomology::BLOWUP_FACTOR,
            }),
            Request::SolveCurve(r) => {
                let o = r.tolerances.newton();
                json!({
                    "tol_residual": o.tol_residual,
                    "max_iter": o.max_iter,
                    "delta_min": o.delta_min,
                    "smooth": r.smooth,
                    "rotation_tol": invcurve_core::newton::ROTATION_TOL,
                })
            }
            Request::FindParameter(r) => {
                let o = r.tolerances.search();
                json!({
                    "tol_residual": o.newton.tol_residual,
                    "max_iter": o.newton.max_iter,
                    "delta_min": o.newton.delta_min,
                    "tol_t": o.tol_t,
                    "min_diameter": o.min_diameter,
                    "max_samples": o.max_samples,
                })
            }
            Request::NormalForm(r) => json!({
                "delta_min": r.tolerances.delta_min(),
                "invariance_tol": invcurve_core::fibered::NORMAL_FORM_TOL,
                "indifference_tol": invcurve_core::fibered::INDIFFERENCE_TOL,
            }),
        }
    }
}

pub struct Report {
    pub code: i32,
    pub json: Value,
}

/// What a successful run returns: the result object and an optional CSV.
struct Success {
    result: Value,
    csv: Option<String>,
}

pub fn execute(request: &Request, csv_path: Option<&Path>) -> Report {
    let mut report = json!({
        "command": request.kind(),
        "input_sha256": request.input_hash(),
        "grid_size": request.grid_size(),
        "tolerances": request.tolerances(),
    });
    let outcome = run(request).and_then(|s| {
        if let Some(path) = csv_path {
            let Some(text) = &s.csv else {
                return Err(CliError::Usage(format!("{} has no CSV export", request.kind())));
            };
            std::fs::write(path, text).map_err(|source| CliError::Write {
                path: path.to_owned(),
                source,
            })?;
        }
        Ok(s.result)
    });
    let code = match outcome {
        Ok(result) => {
            report["result"] = result;
            EXIT_OK
        }
        Err(e) => {
            report["error"] = e.to_json();
            e.exit_code()
        }
    };
    Report { code, json: report }
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Schema(format!("{name} = {x} is not finite")))
    }
}

fn run(request: &Request) -> Result<Success, CliError> {
    match request {
        Request::CheckArith(r) => check_arith(r),
        Request::SolveCohomology(r) => solve_cohomology(r),
        Request::DemoLiouville(r) => demo_liouville(r),
        Request::SolveCurve(r) => solve_curve(r),
        Request::FindParameter(r) => find_parameter_cmd(r),
        Request::NormalForm(r) => normal_form(r),
    }
}

fn check_arith(r: &ArithRequest) -> Result<Success, CliError> {
    finite("alpha", r.alpha)?;
    finite("beta", r.beta)?;
    if !(r.tau >= 0.0) || !r.tau.is_finite() {
        return Err(CliError::Schema(format!("tau = {} must be >= 0", r.tau)));
    }
    if r.nmax == 0 {
        return Err(CliError::Schema("nmax must be >= 1".into()));
    }
    let single = diophantine_constant(r.alpha, r.tau, r.nmax);
    let pair = pair_diophantine_constant(r.alpha, r.beta, r.tau, r.nmax);
    Ok(Success {
        result: json!({
            "c_alpha": single.c,
            "c_pair": pair.c,
            "argmin_n": pair.argmin_n,
            "resonant": single.resonant || pair.resonant,
        }),
        csv: None,
    })
}

fn solve_cohomology(r: &CohomologyRequest) -> Result<Success, CliError> {
    let phi = r.phi.to_function("phi")?;
    let alpha = finite("alpha", r.alpha)?;
    let delta = r.tolerances.delta_min();
    let (sol, residual) = match r.kind {
        EquationKind::Classical => {
            if r.beta.is_some() {
                return Err(CliError::Schema("beta is only used by the twisted equation".into()));
            }
            let sol = solve_classical(&phi, alpha, delta)?;
            let res = classical_residual(&sol.psi, &phi, alpha)?;
            (sol, res)
        }
        EquationKind::Twisted => {
            let Some(beta) = r.beta else {
                return Err(CliError::Schema("the twisted equation needs beta".into()));
            };
            let beta = finite("beta", beta)?;
            let sol = solve_twisted(&phi, alpha, beta, delta)?;
            let res = twisted_residual(&sol.psi, &phi, alpha, beta)?;
            (sol, res)
        }
    };
    Ok(Success {
        result: json!({
            "psi": PeriodicJson::from_function(&sol.psi),
            "residual": residual,
            "min_divisor": sol.min_divisor,
            "dropped_modes": sol.dropped_modes,
            "mean_normalized": sol.mean_normalized,
        }),
        csv: Some(samples_csv(&sol.psi)),
    })
}

fn demo_liouville(r: &LiouvilleRequest) -> Result<Success, CliError> {
    let (alpha, beta, constructed) = match (r.alpha, r.beta) {
        (Some(a), Some(b)) => (finite("alpha", a)?, finite("beta", b)?, false),
        (None, None) => {
            let (a, b, _) = construct_liouville_pair(r.r, r.scan_bound);
            (a, b, true)
        }
        _ => return Err(CliError::Schema("give both alpha and beta, or neither".into())),
    };
    let lf = liouville_forcing(alpha, beta, r.epsilon, r.r, r.modes, r.scan_bound)?;
    let cert = &lf.certificate;
    Ok(Success {
        result: json!({
            "alpha": alpha,
            "beta": beta,
            "constructed_pair": constructed,
            "modes": cert.modes,
            "divisors": cert.divisors,
            "forcing_coeffs": cert.forcing_coeffs,
            "solution_coeffs": cert.solution_coeffs,
            "growth_ratios": cert.growth_ratios(),
            "cr_norm": cert.cr_norm,
            "forcing": PeriodicJson::from_function(&lf.forcing),
        }),
        csv: Some(certificate_csv(
            &cert.modes,
            &cert.divisors,
            &cert.forcing_coeffs,
            &cert.solution_coeffs,
        )),
    })
}

fn report_json(r: &SolveReport) -> Value {
    json!({
        "converged": r.converged,
        "iterations": r.iterations,
        "residual_history": r.residual_history,
        "t_final": complex_json(r.t_final),
        "min_divisor_seen": r.min_divisor_seen,
        "rotation_number": complex_json(r.rotation_number),
        "degree": r.degree,
    })
}

fn curve_json(sol: &CurveSolution) -> Value {
    json!({
        "t": complex_json(sol.t),
        "curve": PeriodicJson::from_function(&sol.u),
        "report": report_json(&sol.report),
    })
}

fn solve_curve(r: &CurveRequest) -> Result<Success, CliError> {
    let map = r.map.to_map(r.grid)?;
    let size = map.grid_size();
    let beta = finite("beta", r.beta.unwrap_or(map.beta))?;
    let mut opts = r.tolerances.newton();
    if r.smooth {
        opts = opts.with_default_smoothing(size);
    }
    let init = match &r.initial {
        Some(u) => u.to_function_on(size, "initial")?,
        None => PeriodicFunction::zeros(size)?,
    };
    let sol = newton_solve(&map, beta, &init, &opts)?;
    Ok(Success {
        result: curve_json(&sol),
        csv: Some(samples_csv(&sol.u)),
    })
}

fn parameter_json(sol: &ParameterSolution) -> Value {
    let trace: Vec<Value> = sol
        .index_trace
        .iter()
        .map(|t| {
            json!({
                "contour": contour_json(&t.contour),
                "index": t.index,
                "samples": t.samples,
            })
        })
        .collect();
    json!({
        "s_star": complex_json(sol.s_star),
        "t_at_star": complex_json(sol.t_at_star),
        "index_trace": trace,
        "newton_solves": sol.newton_solves,
        "curve": curve_json(&sol.curve),
    })
}

fn find_parameter_cmd(r: &ParameterRequest) -> Result<Success, CliError> {
    if !(r.radius > 0.0) || !r.radius.is_finite() {
        return Err(CliError::Schema(format!("radius = {} must be positive", r.radius)));
    }
    let beta = finite("beta", r.beta.unwrap_or(r.family.map().beta))?;
    let opts = r.tolerances.search();
    let sol = match r.family.to_family()? {
        Family::Exponential(f) => find_parameter(&FamilyEvaluator::new(f, r.radius), beta, &opts)?,
        Family::Affine(f) => find_parameter(&FamilyEvaluator::new(f, r.radius), beta, &opts)?,
    };
    Ok(Success {
        result: parameter_json(&sol),
        csv: Some(samples_csv(&sol.curve.u)),
    })
}

fn normal_form(r: &NormalFormRequest) -> Result<Success, CliError> {
    let map = r.map.to_map(None)?;
    let u0 = r.curve.to_function_on(map.grid_size(), "curve")?;
    let (conj, u1) = map.normal_form(&u0, r.tolerances.delta_min())?;
    Ok(Success {
        result: json!({
            "map": MapJson::from_map(&conj),
            "u1": PeriodicJson::from_function(&u1),
        }),
        csv: Some(samples_csv(&u1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arith() -> Request {
        Request::CheckArith(ArithRequest {
            alpha: 0.25,
            beta: 0.5,
            tau: 1.0,
            nmax: 100,
        })
    }

    #[test]
    fn hash_is_stable_and_input_sensitive() {
        let a = arith();
        assert_eq!(a.input_hash(), arith().input_hash());
        assert_eq!(a.input_hash().len(), 64);
        let Request::CheckArith(mut inner) = arith() else {
            unreachable!()
        };
        inner.nmax = 101;
        assert_ne!(Request::CheckArith(inner).input_hash(), a.input_hash());
    }

    #[test]
    fn problem_tolerances_merge_into_payload() {
        let payload = json!({
            "kind": "classical",
            "phi": { "n_modes": 8, "coeffs": vec![[0.0, 0.0]; 8] },
            "alpha": 0.3,
        });
        let tol = Tolerances {
            delta_min: Some(1e-6),
            ..Default::default()
        };
        let req = Request::from_problem("solve-cohomology".into(), payload.clone(), Some(8), Some(tol)).unwrap();
        let Request::SolveCohomology(r) = &req else { panic!() };
        assert_eq!(r.tolerances.delta_min, Some(1e-6));
        assert!(matches!(
            Request::from_problem("solve-cohomology".into(), payload.clone(), Some(16), None),
            Err(CliError::Schema(_))
        ));
        assert!(matches!(
            Request::from_problem("no-such-kind".into(), payload, None, None),
            Err(CliError::Json { .. })
        ));
    }

    #[test]
    fn resonant_arith_reports_resonance() {
        let report = execute(&arith(), None);
        assert_eq!(report.code, EXIT_OK);
        assert_eq!(report.json["result"]["resonant"], json!(true));
    }
}
