//! Command-line front end for `invcurve-core`: problem files, JSON reports
//! and CSV exports.
//!
//! Every run prints one JSON report on standard output. Exit codes are `0`
//! on success, `2` for invalid input and `3` when the computation itself
//! fails (small divisors, divergence, undefined index and so on).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Value};

mod args;
mod commands;
pub mod format;

pub use commands::{Request, Tolerances};

use invcurve_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_MATH: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },

    #[error("invalid input: {0}")]
    Schema(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Math(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(e) => match e.root() {
                Error::InvalidArgument(_) | Error::InvalidGridSize { .. } | Error::GridMismatch { .. } => {
                    EXIT_VALIDATION
                }
                _ => EXIT_MATH,
            },
            _ => EXIT_VALIDATION,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read_error",
            CliError::Write { .. } => "write_error",
            CliError::Json { .. } => "invalid_json",
            CliError::Schema(_) => "schema",
            CliError::Usage(_) => "usage",
            CliError::Math(e) => e.code(),
        }
    }

    fn offending_data(&self) -> Value {
        match self {
            CliError::Read { path, .. } | CliError::Write { path, .. } => json!({ "path": path }),
            CliError::Json { path, source } => json!({
                "path": path,
                "line": source.line(),
                "column": source.column(),
            }),
            CliError::Schema(_) | CliError::Usage(_) => Value::Null,
            CliError::Math(e) => offending(e),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "code": self.code(),
            "detail": self.to_string(),
            "offending_data": self.offending_data(),
        })
    }
}

fn pair(z: invcurve_core::Complex64) -> Value {
    json!([z.re, z.im])
}

fn offending(e: &Error) -> Value {
    let wrap = |mut inner: Value, key: &str, v: Value| {
        match inner.as_object_mut() {
            Some(map) => {
                map.insert(key.into(), v);
            }
            None => inner = json!({ key: v }),
        }
        inner
    };
    match e {
        Error::AtIterate { iteration, source } => wrap(offending(source), "iteration", json!(iteration)),
        Error::AtParameter { s, source } => wrap(offending(source), "s", pair(*s)),
        Error::InvalidGridSize { len } => json!({ "len": len }),
        Error::GridMismatch { left, right } => json!({ "left": left, "right": right }),
        Error::Degenerate { min_modulus } => json!({ "min_modulus": min_modulus }),
        Error::NonzeroDegree { degree } => json!({ "degree": degree }),
        Error::MeanObstruction { mean } => json!({ "mean": pair(*mean) }),
        Error::SmallDivisor { modes, min_divisor } => json!({ "modes": modes, "min_divisor": min_divisor }),
        Error::NotLiouvilleAtScale { scan_bound } => json!({ "scan_bound": scan_bound }),
        Error::OutsideDomain { sup, radius } => json!({ "sup": sup, "radius": radius }),
        Error::IllConditioned { denominator } => json!({ "denominator": denominator }),
        Error::Divergence {
            iterations,
            last_residual,
            residual_history,
        } => json!({
            "iterations": iterations,
            "last_residual": last_residual,
            "residual_history": residual_history,
        }),
        Error::IndexUndefined { min_modulus, .. } => json!({ "min_modulus": min_modulus }),
        Error::NonTransversal { margin } => json!({ "margin": margin }),
        Error::NoZeroCertified { index } => json!({ "index": index }),
        Error::Resolution { .. }
        | Error::Precondition { .. }
        | Error::PartialCoverage { .. }
        | Error::OutOfBasin { .. }
        | Error::InvalidArgument(_) => Value::Null,
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Result of one invocation: the exit code and the text for standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
}

fn failure(command: &str, err: &CliError) -> Output {
    let report = json!({
        "command": command,
        "input_sha256": Value::Null,
        "grid_size": Value::Null,
        "tolerances": Value::Null,
        "error": err.to_json(),
    });
    Output {
        code: err.exit_code(),
        stdout: format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    }
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Output {
                    code: EXIT_OK,
                    stdout: e.to_string(),
                },
                _ => failure("", &CliError::Usage(e.to_string())),
            };
        }
    };
    let name = cli.command.name();
    let (request, csv) = match cli.command.into_request() {
        Ok(r) => r,
        Err(e) => return failure(name, &e),
    };
    let report = commands::execute(&request, csv.as_deref());
    Output {
        code: report.code,
        stdout: format!("{}\n", serde_json::to_string_pretty(&report.json).unwrap()),
    }
}
