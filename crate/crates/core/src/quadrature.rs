//! Pre-corrected trapezoidal weights for the 2D Helmholtz Green's function.
//!
//! Off the diagonal the weight is `h^2 G(x_j - x_k)`; the diagonal weight is
//! `w0 = h^2/(2 pi) [pi i/2 - (ln(kappa h/2) - gamma - beta)]`. The lattice
//! constant `beta` is found by self-calibration on a radial Gaussian.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fastconv::generator_spectrum;
use crate::grid::GridSpec;
use crate::numint::adaptive;
use crate::specfun::{j0_y0, EULER_GAMMA};

/// Tolerance used for the process-wide default `beta`.
pub const DEFAULT_BETA_TOL: f64 = 1e-10;

/// Name of the on-disk `beta` cache.
pub const BETA_CACHE_FILE: &str = "beta.cache";

const MAX_LEVELS: usize = 8;

/// Euler's constant.
pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

/// `G(r) = (i/4) H0(kappa r)` for `r > 0`.
#[inline]
fn green(kappa: f64, r: f64) -> Complex64 {
    let (j0, y0) = j0_y0(kappa * r);
    Complex64::new(-0.25 * y0, 0.25 * j0)
}

/// Corrected diagonal weight.
pub fn diagonal_weight(kappa: f64, h: f64, beta: f64) -> Complex64 {
    let s = h * h / (2.0 * PI);
    Complex64::new(s * (-(0.5 * kappa * h).ln() + EULER_GAMMA + beta), 0.25 * h * h)
}

/// Neumaier-compensated complex accumulator.
#[derive(Default)]
struct Sum {
    s: Complex64,
    c: Complex64,
}

impl Sum {
    fn add(&mut self, x: Complex64) {
        let t = self.s + x;
        let fix = |s: f64, x: f64, t: f64| {
            if s.abs() >= x.abs() {
                (s - t) + x
            } else {
                (x - t) + s
            }
        };
        self.c.re += fix(self.s.re, x.re, t.re);
        self.c.im += fix(self.s.im, x.im, t.im);
        self.s = t;
    }

    fn value(&self) -> Complex64 {
        self.s + self.c
    }
}

/// Cutoff radius beyond which `exp(-r^2/sigma^2) < 1e-40`.
fn gaussian_radius(sigma: f64) -> f64 {
    sigma * (40.0 * std::f64::consts::LN_10).sqrt()
}

/// `int G(-y) exp(-|y|^2/sigma^2) dy` by adaptive radial quadrature.
fn gaussian_reference(kappa: f64, sigma: f64) -> Complex64 {
    let r_max = gaussian_radius(sigma);
    // panels of about a quarter wavelength keep the oscillation resolved
    let panels = ((r_max * kappa / (0.5 * PI)).ceil() as usize).max(8);
    let dr = r_max / panels as f64;
    let mut acc = Sum::default();
    for k in 0..panels {
        let part = adaptive(
            |r: f64| {
                if r <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                green(kappa, r) * (2.0 * PI * r * (-(r * r) / (sigma * sigma)).exp())
            },
            k as f64 * dr,
            (k + 1) as f64 * dr,
            1e-16,
        );
        acc.add(part);
    }
    acc.value()
}

/// Off-diagonal lattice sum `sum_{k != 0} h^2 G(h k) f(h|k|)` for the
/// Gaussian, using the eightfold symmetry of the square lattice.
fn gaussian_lattice_sum(kappa: f64, sigma: f64, h: f64) -> Complex64 {
    let r_max = gaussian_radius(sigma);
    let pmax = (r_max / h).ceil() as i64;
    let rows: Vec<Complex64> = (1..=pmax)
        .into_par_iter()
        .map(|p| {
            let mut acc = Sum::default();
            for q in 0..=p {
                let r = h * ((p * p + q * q) as f64).sqrt();
                if r > r_max {
                    break;
                }
                let mult = if q == 0 || q == p { 4.0 } else { 8.0 };
                let f = (-(r * r) / (sigma * sigma)).exp();
                acc.add(green(kappa, r) * (mult * h * h * f));
            }
            acc.value()
        })
        .collect();
    let mut acc = Sum::default();
    for v in rows {
        acc.add(v);
    }
    acc.value()
}

/// The `beta` that makes the corrected rule exact for the Gaussian of width
/// `sigma` at spacing `h`. Imaginary part is a consistency check only.
pub fn beta_estimate(kappa: f64, sigma: f64, h: f64) -> Complex64 {
    let exact = gaussian_reference(kappa, sigma);
    beta_estimate_with(kappa, sigma, h, exact)
}

fn beta_estimate_with(kappa: f64, sigma: f64, h: f64, exact: Complex64) -> Complex64 {
    let sum = gaussian_lattice_sum(kappa, sigma, h);
    let w0 = diagonal_weight(kappa, h, 0.0);
    (exact - sum - w0) * (2.0 * PI / (h * h))
}

/// Richardson extrapolation of `beta` from the dyadic sequence
/// `h = sigma/4, sigma/8, ...`, eliminating powers of `h^2`.
pub fn calibrate_beta(kappa: f64, sigma: f64, tol: f64) -> Result<f64> {
    if !(kappa > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "calibration needs kappa > 0 and sigma > 0, got {kappa}, {sigma}"
        )));
    }
    let exact = gaussian_reference(kappa, sigma);
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut last_diff = f64::INFINITY;
    for level in 0..MAX_LEVELS {
        let h = sigma / (4u64 << level) as f64;
        let mut row = vec![beta_estimate_with(kappa, sigma, h, exact).re];
        for k in 1..=level {
            let f = 4f64.powi(k as i32);
            let prev = &table[level - 1];
            let v = row[k - 1] + (row[k - 1] - prev[k - 1]) / (f - 1.0);
            row.push(v);
        }
        if level >= 2 {
            let diff = (row[level] - table[level - 1][level - 1]).abs();
            if diff < tol {
                return Ok(row[level]);
            }
            last_diff = diff;
        }
        table.push(row);
    }
    Err(Error::BetaNotConverged { diff: last_diff })
}

/// Self-calibrated `beta` to tolerance `tol` (at least `1e-12`).
pub fn compute_beta(tol: f64) -> Result<f64> {
    if !(tol >= 1e-12) {
        return Err(Error::InvalidParameter(format!("beta tolerance {tol} below 1e-12")));
    }
    calibrate_beta(1.0, 1.0, tol)
}

/// Reads `dir/beta.cache` when it holds a value at least as accurate as
/// `tol`; otherwise computes `beta` and rewrites the file.
pub fn load_or_compute_beta(dir: &Path, tol: f64) -> Result<f64> {
    let path = dir.join(BETA_CACHE_FILE);
    if let Ok(text) = fs::read_to_string(&path) {
        let vals: Vec<f64> = text
            .split_whitespace()
            .filter_map(|s| s.parse().ok())
            .collect();
        if let [beta, cached_tol] = vals[..] {
            if cached_tol <= tol && beta.is_finite() {
                return Ok(beta);
            }
        }
    }
    let beta = compute_beta(tol)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    fs::write(&path, format!("{beta:.17e} {tol:.3e}\n")).map_err(|e| Error::io(&path, e))?;
    Ok(beta)
}

/// Process-wide `beta` at [`DEFAULT_BETA_TOL`], computed on first use.
pub fn default_beta() -> f64 {
    static BETA: OnceLock<f64> = OnceLock::new();
    *BETA.get_or_init(|| compute_beta(DEFAULT_BETA_TOL).expect("beta calibration converges"))
}

/// Circulant embedding of the Toeplitz weight matrix on a grid.
#[derive(Clone, Debug)]
pub struct KernelTable {
    kappa: f64,
    grid: GridSpec,
    beta: f64,
    samples: Vec<Complex64>,
    spectrum: Vec<Complex64>,
}

impl KernelTable {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `2n x 2n` generator, row-major; offset `p` lives at row `p mod 2n`.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub(crate) fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Weight for the offset `(p, q)`, `|p|, |q| < n`.
    pub fn weight(&self, p: i64, q: i64) -> Complex64 {
        let m = 2 * self.grid.n() as i64;
        let i = p.rem_euclid(m) as usize;
        let j = q.rem_euclid(m) as usize;
        self.samples[i * m as usize + j]
    }
}

/// Builds the weight table for wavenumber `kappa` on `g`.
pub fn build_kernel_table(kappa: f64, g: &GridSpec, beta: f64) -> Result<KernelTable> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must be positive")));
    }
    let n = g.n();
    let m = 2 * n;
    let h = g.h();
    // weights for nonnegative offsets, symmetric in (p, q)
    let mut quarter = vec![Complex64::new(0.0, 0.0); n * n];
    quarter.par_chunks_mut(n).enumerate().for_each(|(p, row)| {
        for (q, w) in row.iter_mut().enumerate().take(p + 1) {
            if p == 0 && q == 0 {
                *w = diagonal_weight(kappa, h, beta);
            } else {
                let r = h * ((p * p + q * q) as f64).sqrt();
                *w = green(kappa, r) * (h * h);
            }
        }
    });
    for p in 0..n {
        for q in (p + 1)..n {
            quarter[p * n + q] = quarter[q * n + p];
        }
    }
    let fold = |i: usize| if i < n { Some(i) } else if i > n { Some(m - i) } else { None };
    let mut samples = vec![Complex64::new(0.0, 0.0); m * m];
    samples.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        if let Some(p) = fold(i) {
            for (j, w) in row.iter_mut().enumerate() {
                if let Some(q) = fold(j) {
                    *w = quarter[p * n + q];
                }
            }
        }
    });
    let spectrum = generator_spectrum(&samples, n);
    Ok(KernelTable {
        kappa,
        grid: *g,
        beta,
        samples,
        spectrum,
    })
}
