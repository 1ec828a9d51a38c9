//! Analytic solutions for a disc of constant contrast centred at the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Point;
use crate::specfun::bessel_all;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscScatteringParams {
    pub kappa: f64,
    pub radius: f64,
    pub m_const: f64,
}

impl DiscScatteringParams {
    pub fn new(kappa: f64, radius: f64, m_const: f64) -> Result<Self> {
        if !(kappa > 0.0 && radius > 0.0 && 1.0 - m_const > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need kappa > 0, R > 0, m < 1; got {kappa}, {radius}, {m_const}"
            )));
        }
        Ok(DiscScatteringParams {
            kappa,
            radius,
            m_const,
        })
    }

    /// Interior wavenumber `kappa sqrt(1 - m)`.
    pub fn kappa_i(&self) -> f64 {
        self.kappa * (1.0 - self.m_const).sqrt()
    }

    /// Default truncation `ceil(kappa R) + 40`.
    pub fn default_nmax(&self) -> usize {
        (self.kappa * self.radius).ceil() as usize + 40
    }
}

fn solve2(a: [[Complex64; 2]; 2], rhs: [Complex64; 2]) -> Result<[Complex64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.norm() < 1e-14 {
        return Err(Error::SingularSystem { det: det.norm() });
    }
    Ok([
        (rhs[0] * a[1][1] - a[0][1] * rhs[1]) / det,
        (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / det,
    ])
}

/// `(alpha, beta_c)` of the radially symmetric solution.
fn radial_coefficients(p: &DiscScatteringParams) -> Result<[Complex64; 2]> {
    let k = p.kappa;
    let ki = p.kappa_i();
    let (j0i, _, j1i, _) = bessel_all(ki * p.radius);
    let (j0, y0, j1, y1) = bessel_all(k * p.radius);
    let h0 = Complex64::new(j0, y0);
    let h1 = Complex64::new(j1, y1);
    let one = Complex64::new(1.0, 0.0);
    solve2(
        [[one * j0i, -h0], [one * (ki * j1i), -h1 * k]],
        [one * j0, one * (k * j1)],
    )
}

/// Radially symmetric solution for `u^i = J0(kappa |x|)`.
#[derive(Clone, Copy, Debug)]
pub struct RadialSolution {
    params: DiscScatteringParams,
    alpha: Complex64,
    beta: Complex64,
}

impl RadialSolution {
    pub fn new(p: &DiscScatteringParams) -> Result<Self> {
        let [alpha, beta] = radial_coefficients(p)?;
        Ok(RadialSolution {
            params: *p,
            alpha,
            beta,
        })
    }

    /// Interior amplitude and scattering coefficient.
    pub fn coefficients(&self) -> (Complex64, Complex64) {
        (self.alpha, self.beta)
    }

    pub fn eval(&self, x: Point) -> Complex64 {
        let p = &self.params;
        let r = x[0].hypot(x[1]);
        if r <= p.radius {
            let (j0, _, _, _) = bessel_all_at(p.kappa_i() * r);
            self.alpha * j0
        } else {
            let (j0, y0, _, _) = bessel_all(p.kappa * r);
            Complex64::new(j0, 0.0) + self.beta * Complex64::new(j0, y0)
        }
    }
}

/// Total field for `u^i = J0(kappa |x|)`.
pub fn radial_disc_solution(p: &DiscScatteringParams, x: Point) -> Result<Complex64> {
    Ok(RadialSolution::new(p)?.eval(x))
}

/// `bessel_all` extended to `x = 0`, where only `J0 = 1` is meaningful.
fn bessel_all_at(x: f64) -> (f64, f64, f64, f64) {
    if x == 0.0 {
        (1.0, f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY)
    } else {
        bessel_all(x)
    }
}

/// `J_0..=J_nmax` at `x > 0` by downward recurrence, normalized with
/// `J0 + 2 sum J_2k = 1`.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return v;
    }
    let top = nmax.max(x as usize);
    let start = top + 20 + (40.0 * (top as f64 + 1.0)).sqrt() as usize;
    let start = start + start % 2;
    let mut out = vec![0.0; nmax + 1];
    let (mut next, mut cur) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    for m in (0..=start).rev() {
        if m <= nmax {
            out[m] = cur;
        }
        if m % 2 == 0 {
            norm += if m == 0 { cur } else { 2.0 * cur };
        }
        if m == 0 {
            break;
        }
        let prev = 2.0 * m as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            out.iter_mut().for_each(|v| *v *= s);
        }
    }
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// `Y_0..=Y_nmax` at `x > 0` by upward recurrence.
pub fn bessel_y_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let (_, y0, _, y1) = bessel_all(x);
    let mut out = vec![y0; nmax + 1];
    if nmax >= 1 {
        out[1] = y1;
    }
    for m in 1..nmax {
        out[m + 1] = 2.0 * m as f64 / x * out[m] - out[m - 1];
    }
    out
}

/// `Z_m'` from `Z_{m-1}`, `Z_m`, `Z_{m+1}`.
fn derivative(z: &[f64], m: usize, zm1: f64) -> f64 {
    if m == 0 {
        -z[1]
    } else {
        0.5 * (z[m - 1] - zm1)
    }
}

/// Per-mode interior and scattered coefficients `(a_m, b_m)` for unit
/// incident mode `J_m(kappa r) e^{i m theta}`, `m = 0..=nmax`.
pub fn mode_coefficients(p: &DiscScatteringParams, nmax: usize) -> Result<Vec<[Complex64; 2]>> {
    let k = p.kappa;
    let ki = p.kappa_i();
    let xr = k * p.radius;
    let xi = ki * p.radius;
    let j = bessel_j_sequence(nmax + 1, xr);
    let y = bessel_y_sequence(nmax + 1, xr);
    let ji = bessel_j_sequence(nmax + 1, xi);
    let one = Complex64::new(1.0, 0.0);
    (0..=nmax)
        .map(|m| {
            let dj = derivative(&j, m, j[m + 1]);
            let dy = derivative(&y, m, y[m + 1]);
            let dji = derivative(&ji, m, ji[m + 1]);
            let h = Complex64::new(j[m], y[m]);
            let dh = Complex64::new(dj, dy);
            solve2(
                [[one * ji[m], -h], [one * (ki * dji), -dh * k]],
                [one * j[m], one * (k * dj)],
            )
        })
        .collect()
}

/// Modal series for the plane wave `e^{i kappa x1}`.
#[derive(Clone, Debug)]
pub struct MieSeries {
    params: DiscScatteringParams,
    nmax: usize,
    coeffs: Vec<[Complex64; 2]>,
}

impl MieSeries {
    pub fn new(p: &DiscScatteringParams, nmax: usize) -> Result<Self> {
        if nmax < 2 {
            return Err(Error::InvalidParameter("nmax must be at least 2".into()));
        }
        Ok(MieSeries {
            params: *p,
            nmax,
            coeffs: mode_coefficients(p, nmax)?,
        })
    }

    /// Total field at `x`, summing modes up to `nmax`.
    pub fn eval(&self, x: Point) -> Result<Complex64> {
        let p = &self.params;
        let nmax = self.nmax;
        let coeffs = &self.coeffs;
        let r = x[0].hypot(x[1]);
        let theta = x[1].atan2(x[0]);
        let terms: Vec<Complex64> = if r <= p.radius {
            let ji = bessel_j_sequence(nmax, p.kappa_i() * r);
            (0..=nmax).map(|m| coeffs[m][0] * ji[m]).collect()
        } else {
            let j = bessel_j_sequence(nmax, p.kappa * r);
            let y = bessel_y_sequence(nmax, p.kappa * r);
            (0..=nmax)
                .map(|m| {
                    let s = coeffs[m][1] * Complex64::new(j[m], y[m]);
                    if s.is_finite() {
                        Complex64::new(j[m], 0.0) + s
                    } else {
                        Complex64::new(j[m], 0.0)
                    }
                })
                .collect()
        };
        // modes +-m combine into 2 i^m cos(m theta)
        let mut u = Complex64::new(0.0, 0.0);
        let mut im = Complex64::new(1.0, 0.0);
        let mut tail = 0.0;
        for (m, t) in terms.iter().enumerate() {
            let w = if m == 0 { 1.0 } else { 2.0 * (m as f64 * theta).cos() };
            let c = im * t * w;
            if m + 1 >= nmax {
                tail += c.norm();
            }
            u += c;
            im *= Complex64::new(0.0, 1.0);
        }
        if tail > 1e-12 * u.norm().max(1.0) {
            return Err(Error::TruncationNotConverged { nmax, tail });
        }
        Ok(u)
    }
}

/// Total field for the plane wave `e^{i kappa x1}`, summing modes up to
/// `nmax`.
pub fn mie_disc_solution(p: &DiscScatteringParams, x: Point, nmax: usize) -> Result<Complex64> {
    MieSeries::new(p, nmax)?.eval(x)
}
