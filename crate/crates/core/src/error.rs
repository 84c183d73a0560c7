use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid size {len} is not a power of two >= 8")]
    InvalidGridSize { len: usize },

    #[error("grid sizes differ: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("under-resolved: {detail}")]
    Resolution { detail: String },

    #[error("function nearly vanishes on the grid (min modulus {min_modulus:e})")]
    Degenerate { min_modulus: f64 },

    #[error("winding degree is {degree}, logarithm is not globally defined")]
    NonzeroDegree { degree: i64 },

    #[error("mean {mean} is not zero: equation is obstructed")]
    MeanObstruction { mean: Complex64 },

    #[error("small divisor {min_divisor:e} at modes {modes:?}")]
    SmallDivisor { modes: Vec<i64>, min_divisor: f64 },

    #[error("no near-resonant mode below (1+|n|)^-(r+3) up to |n| = {scan_bound}")]
    NotLiouvilleAtScale { scan_bound: u64 },

    #[error("curve leaves the fiber domain: sup |u| = {sup} >= radius {radius}")]
    OutsideDomain { sup: f64, radius: f64 },

    #[error("precondition failed: {detail}")]
    Precondition { detail: String },

    #[error("ill-conditioned correction: |denominator| = {denominator:e}")]
    IllConditioned { denominator: f64 },

    #[error("no convergence after {iterations} iterations (last residual {last_residual:e})")]
    Divergence {
        iterations: usize,
        last_residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("at Newton iterate {iteration}: {source}")]
    AtIterate { iteration: usize, source: Box<Error> },

    #[error("Kronecker index undefined: {detail} (min boundary modulus {min_modulus:e})")]
    IndexUndefined { detail: String, min_modulus: f64 },

    #[error("family is not transversal: margin {margin:e}")]
    NonTransversal { margin: f64 },

    #[error("boundary index is {index}; no zero is certified inside the disk")]
    NoZeroCertified { index: i64 },

    #[error("at parameter s = {s}: {source}")]
    AtParameter { s: Complex64, source: Box<Error> },

    #[error("parameter search did not converge: {detail}")]
    PartialCoverage { detail: String },

    #[error("rescaled family is outside the working ball: {detail}")]
    OutOfBasin { detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGridSize { .. } => "invalid_grid_size",
            Error::GridMismatch { .. } => "grid_mismatch",
            Error::Resolution { .. } => "resolution",
            Error::Degenerate { .. } => "degenerate",
            Error::NonzeroDegree { .. } => "nonzero_degree",
            Error::MeanObstruction { .. } => "mean_obstruction",
            Error::SmallDivisor { .. } => "small_divisor",
            Error::NotLiouvilleAtScale { .. } => "not_liouville_at_scale",
            Error::OutsideDomain { .. } => "outside_domain",
            Error::Precondition { .. } => "precondition",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::Divergence { .. } => "divergence",
            Error::AtIterate { source, .. } | Error::AtParameter { source, .. } => source.code(),
            Error::IndexUndefined { .. } => "index_undefined",
            Error::NonTransversal { .. } => "non_transversal",
            Error::NoZeroCertified { .. } => "no_zero_certified",
            Error::PartialCoverage { .. } => "partial_coverage",
            Error::OutOfBasin { .. } => "out_of_basin",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }

    /// Strips `AtIterate` / `AtParameter` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIterate { source, .. } | Error::AtParameter { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn at_iterate(self, iteration: usize) -> Error {
        Error::AtIterate {
            iteration,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_parameter(self, s: Complex64) -> Error {
        Error::AtParameter {
            s,
            source: Box::new(self),
        }
    }
}
