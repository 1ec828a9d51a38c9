use std::path::PathBuf;

use thiserror::Error;

use crate::grid::ComplexField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{func}: argument {x} outside the domain")]
    Domain { func: &'static str, x: f64 },

    #[error("geometry is not strictly inside the period cell (-{a}, {a})^2")]
    GeometryOutsideDomain { a: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("boundary quadrature did not reach tolerance {tol:e} (last change {achieved:e})")]
    ToleranceNotMet { tol: f64, achieved: f64 },

    #[error("F = {f} exceeds the cost guard of {max}")]
    CostGuard { f: usize, max: usize },

    #[error("F = {f} exceeds n/2 = {half}")]
    FTooLarge { f: usize, half: usize },

    #[error("grid mismatch: expected n={expected_n}, a={expected_a}; got n={got_n}, a={got_a}")]
    GridMismatch {
        expected_n: usize,
        expected_a: f64,
        got_n: usize,
        got_a: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("window too tight: scatterer extends to {extent} but r_in = {r_in}")]
    WindowTooTight { extent: f64, r_in: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("beta calibration did not settle (last two extrapolants differ by {diff:e})")]
    BetaNotConverged { diff: f64 },

    #[error("GMRES hit {iterations} iterations with relative residual {residual:e}")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        best: Box<ComplexField>,
    },

    #[error("transmission system is singular (|det| = {det:e})")]
    SingularSystem { det: f64 },

    #[error("modal series not converged at nmax = {nmax} (tail {tail:e})")]
    TruncationNotConverged { nmax: usize, tail: f64 },

    #[error("reference field is identically zero")]
    ZeroDenominator,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config: {0}")]
    Config(String),

    #[error("bad file format in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
