use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::*;
use crate::{read_json, CliError};

#[derive(Debug, Parser)]
#[command(name = "invcurve", version, about = "Invariant curves of fibered holomorphic maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Classical,
    Twisted,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diophantine constants of α and of the pair (α, β).
    CheckArith {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 1000)]
        nmax: u64,
    },
    /// Solves ψ(θ+α) − ψ(θ) = φ(θ), or its twisted form.
    SolveCohomology {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// PeriodicFunction JSON for φ.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long)]
        delta_min: Option<f64>,
        #[arg(long)]
        output_csv: Option<PathBuf>,
    },
    /// Builds a small forcing whose formal solution blows up.
    ///
    /// Without --alpha/--beta a Liouville pair is constructed.
    DemoLiouville {
        #[arg(long, requires = "beta", allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha", allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_R)]
        r: u32,
        #[arg(long, default_value_t = DEFAULT_MODES)]
        modes: usize,
        #[arg(long, default_value_t = DEFAULT_SCAN)]
        scan: u64,
        #[arg(long)]
        output_csv: Option<PathBuf>,
    },
    /// Newton iteration for an invariant curve with rotation number β.
    SolveCurve {
        /// FiberedMap JSON.
        #[arg(long)]
        map: PathBuf,
        /// Target rotation number (defaults to the map's β).
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Grid size for the computation (defaults to the map's grid).
        #[arg(long)]
        grid: Option<usize>,
        /// Smooth each update with the default schedule.
        #[arg(long)]
        smooth: bool,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        delta_min: Option<f64>,
        /// Starting curve (PeriodicFunction JSON); zero by default.
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long)]
        output_csv: Option<PathBuf>,
    },
    /// Locates the parameter at which no rotation correction is needed.
    FindParameter {
        /// Family JSON (`shape`: exponential or affine).
        #[arg(long)]
        family: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Radius of the search disk around s = 0.
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        tol_t: Option<f64>,
        #[arg(long)]
        output_csv: Option<PathBuf>,
    },
    /// Conjugates a map to normal form around an invariant curve.
    NormalForm {
        #[arg(long)]
        map: PathBuf,
        /// The invariant curve (PeriodicFunction JSON).
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        delta_min: Option<f64>,
        /// Dumps the conjugating factor u₁.
        #[arg(long)]
        output_csv: Option<PathBuf>,
    },
    /// Runs a problem file `{kind, payload, grid_size, tolerances}`.
    RunProblem {
        problem: PathBuf,
        #[arg(long)]
        output_csv: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckArith { .. } => "check-arith",
            Command::SolveCohomology { .. } => "solve-cohomology",
            Command::DemoLiouville { .. } => "demo-liouville",
            Command::SolveCurve { .. } => "solve-curve",
            Command::FindParameter { .. } => "find-parameter",
            Command::NormalForm { .. } => "normal-form",
            Command::RunProblem { .. } => "run-problem",
        }
    }

    pub fn into_request(self) -> Result<(Request, Option<PathBuf>), CliError> {
        Ok(match self {
            Command::CheckArith { alpha, beta, tau, nmax } => {
                (Request::CheckArith(ArithRequest { alpha, beta, tau, nmax }), None)
            }
            Command::SolveCohomology {
                kind,
                input,
                alpha,
                beta,
                delta_min,
                output_csv,
            } => {
                let kind = match kind {
                    KindArg::Classical => EquationKind::Classical,
                    KindArg::Twisted => EquationKind::Twisted,
                };
                let req = CohomologyRequest {
                    kind,
                    phi: read_json(&input)?,
                    alpha,
                    beta,
                    tolerances: Tolerances {
                        delta_min,
                        ..Default::default()
                    },
                };
                (Request::SolveCohomology(req), output_csv)
            }
            Command::DemoLiouville {
                alpha,
                beta,
                epsilon,
                r,
                modes,
                scan,
                output_csv,
            } => {
                let req = LiouvilleRequest {
                    alpha,
                    beta,
                    epsilon,
                    r,
                    modes,
                    scan_bound: scan,
                };
                (Request::DemoLiouville(req), output_csv)
            }
            Command::SolveCurve {
                map,
                beta,
                grid,
                smooth,
                tol,
                max_iter,
                delta_min,
                initial,
                output_csv,
            } => {
                let req = CurveRequest {
                    map: read_json(&map)?,
                    beta,
                    grid,
                    smooth,
                    initial: initial.map(|p| read_json(&p)).transpose()?,
                    tolerances: Tolerances {
                        tol_residual: tol,
                        delta_min,
                        max_iter,
                        tol_t: None,
                    },
                };
                (Request::SolveCurve(req), output_csv)
            }
            Command::FindParameter {
                family,
                beta,
                radius,
                tol,
                tol_t,
                output_csv,
            } => {
                let req = ParameterRequest {
                    family: read_json(&family)?,
                    beta,
                    radius,
                    tolerances: Tolerances {
                        tol_residual: tol,
                        tol_t,
                        ..Default::default()
                    },
                };
                (Request::FindParameter(req), output_csv)
            }
            Command::NormalForm {
                map,
                curve,
                delta_min,
                output_csv,
            } => {
                let req = NormalFormRequest {
                    map: read_json(&map)?,
                    curve: read_json(&curve)?,
                    tolerances: Tolerances {
                        delta_min,
                        ..Default::default()
                    },
                };
                (Request::NormalForm(req), output_csv)
            }
            Command::RunProblem { problem, output_csv } => (Request::from_problem_file(&problem)?, output_csv),
        })
    }
}
