//! Discrete Lippmann-Schwinger operator `A u = u + kappa^2 T(m_e chi u)` and
//! restarted GMRES.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fastconv::{eval_smoothed_indicator, ConvWorkspace};
use crate::geometry::{indicator_coeffs, IndicatorCoeffs, DEFAULT_COEFF_TOL};
use crate::grid::{ComplexField, GridSpec, Point};
use crate::quadrature::{build_kernel_table, default_beta, KernelTable};
use crate::specfun::j0_y0;
use crate::windowing::{sample_contrast, ContrastSpec, WindowParams};

/// Incident wave; the wavenumber comes from the problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncidentField {
    PlaneWave { direction: Point },
    RadialBessel,
}

impl IncidentField {
    /// Plane wave along `direction`, which must have unit length.
    pub fn plane_wave(direction: Point) -> Result<Self> {
        let f = IncidentField::PlaneWave { direction };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if let IncidentField::PlaneWave { direction: d } = self {
            let norm = d[0].hypot(d[1]);
            if !((norm - 1.0).abs() <= 1e-14) {
                return Err(Error::InvalidParameter(format!(
                    "plane-wave direction has norm {norm}"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, kappa: f64, x: Point) -> Complex64 {
        match self {
            IncidentField::PlaneWave { direction: d } => {
                Complex64::from_polar(1.0, kappa * (d[0] * x[0] + d[1] * x[1]))
            }
            IncidentField::RadialBessel => {
                let r = kappa * x[0].hypot(x[1]);
                if r == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(j0_y0(r).0, 0.0)
                }
            }
        }
    }
}

/// `u^i` at every node.
pub fn sample_incident(f: &IncidentField, kappa: f64, g: &GridSpec) -> ComplexField {
    ComplexField::from_fn(*g, |x| f.eval(kappa, x))
}

/// How the indicator of `D` enters the operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "f", rename_all = "snake_case")]
pub enum Smoothing {
    /// Sharp samples of `chi_D`; boundary nodes count as inside.
    None,
    /// Truncated Fourier series with `|j|, |k| <= F`.
    Fourier(usize),
}

#[derive(Clone, Debug)]
pub struct ProblemSetup {
    pub grid: GridSpec,
    pub kappa: f64,
    pub contrast: ContrastSpec,
    pub window: WindowParams,
    pub smoothing: Smoothing,
    pub incident: IncidentField,
    /// Lattice constant; the self-calibrated default when `None`.
    pub beta: Option<f64>,
    /// Accuracy requested from the indicator coefficients.
    pub coeff_tol: f64,
}

impl ProblemSetup {
    /// Setup with `F = n/2`, default `beta` and coefficient tolerance.
    pub fn new(
        grid: GridSpec,
        kappa: f64,
        contrast: ContrastSpec,
        window: WindowParams,
        incident: IncidentField,
    ) -> Self {
        ProblemSetup {
            grid,
            kappa,
            contrast,
            window,
            smoothing: Smoothing::Fourier(grid.n() / 2),
            incident,
            beta: None,
            coeff_tol: DEFAULT_COEFF_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa = {} must be positive",
                self.kappa
            )));
        }
        if let Smoothing::Fourier(f) = self.smoothing {
            if f == 0 {
                return Err(Error::InvalidParameter("F must be at least 1".into()));
            }
            if f > self.grid.n() / 2 {
                return Err(Error::FTooLarge {
                    f,
                    half: self.grid.n() / 2,
                });
            }
        }
        self.incident.validate()?;
        self.contrast.shape.validate(self.grid.a())?;
        self.window.validate(&self.contrast.shape, self.grid.a())
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(default_beta)
    }
}

/// Precomputed pieces of the operator: weights, `m_e`, `chi` and their
/// product. Owns its FFT workspace, so one state serves one solve at a time.
pub struct OperatorState {
    kernel: KernelTable,
    m_e: ComplexField,
    indicator: ComplexField,
    product: Vec<Complex64>,
    kappa2: f64,
    workspace: ConvWorkspace,
    scratch: Vec<Complex64>,
}

impl OperatorState {
    pub fn from_parts(kernel: KernelTable, m_e: ComplexField, indicator: ComplexField) -> Result<Self> {
        kernel.grid().ensure_same(m_e.grid())?;
        kernel.grid().ensure_same(indicator.grid())?;
        let product = m_e
            .values()
            .iter()
            .zip(indicator.values())
            .map(|(m, c)| m * c)
            .collect();
        let kappa2 = kernel.kappa() * kernel.kappa();
        let workspace = ConvWorkspace::new(kernel.grid());
        let len = kernel.grid().len();
        Ok(OperatorState {
            kernel,
            m_e,
            indicator,
            product,
            kappa2,
            workspace,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    /// Builds the state, computing indicator coefficients when needed.
    pub fn new(setup: &ProblemSetup) -> Result<Self> {
        OperatorState::with_coefficients(setup, None)
    }

    /// As [`OperatorState::new`], reusing `coeffs` in Fourier mode when
    /// they match `F` and `a`.
    pub fn with_coefficients(setup: &ProblemSetup, coeffs: Option<&IndicatorCoeffs>) -> Result<Self> {
        setup.validate()?;
        let g = setup.grid;
        let kernel = build_kernel_table(setup.kappa, &g, setup.beta())?;
        let m_e = sample_contrast(&setup.contrast, &setup.window, &g)?;
        let indicator = match setup.smoothing {
            Smoothing::None => {
                let shape = &setup.contrast.shape;
                ComplexField::from_fn(g, |x| {
                    Complex64::new(if shape.contains(x) { 1.0 } else { 0.0 }, 0.0)
                })
            }
            Smoothing::Fourier(f) => match coeffs {
                Some(c) if c.f() == f && c.a() == g.a() => eval_smoothed_indicator(c, &g)?,
                Some(c) => {
                    return Err(Error::InvalidParameter(format!(
                        "coefficients for F = {}, a = {} do not match F = {f}, a = {}",
                        c.f(),
                        c.a(),
                        g.a()
                    )))
                }
                None => {
                    let c = indicator_coeffs(&setup.contrast.shape, f, g.a(), setup.coeff_tol)?;
                    eval_smoothed_indicator(&c, &g)?
                }
            },
        };
        OperatorState::from_parts(kernel, m_e, indicator)
    }

    pub fn grid(&self) -> &GridSpec {
        self.kernel.grid()
    }

    pub fn kernel(&self) -> &KernelTable {
        &self.kernel
    }

    pub fn m_e(&self) -> &ComplexField {
        &self.m_e
    }

    pub fn indicator(&self) -> &ComplexField {
        &self.indicator
    }

    /// `out = u + kappa^2 T(m_e chi u)` on flat slices.
    pub fn apply_slice(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        for ((s, p), v) in self.scratch.iter_mut().zip(&self.product).zip(u) {
            *s = p * v;
        }
        self.workspace.apply(&self.kernel, &self.scratch, out);
        for (o, v) in out.iter_mut().zip(u) {
            *o = v + *o * self.kappa2;
        }
    }
}

/// Something GMRES can apply.
pub trait LinearOperator {
    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]);
}

impl LinearOperator for OperatorState {
    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_slice(x, y);
    }
}

impl<F: FnMut(&[Complex64], &mut [Complex64])> LinearOperator for F {
    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        self(x, y)
    }
}

/// Applies the discrete operator to `u`.
pub fn apply_operator(state: &mut OperatorState, u: &ComplexField) -> Result<ComplexField> {
    state.grid().ensure_same(u.grid())?;
    let mut out = ComplexField::zeros(*u.grid());
    state.apply_slice(u.values(), out.values_mut());
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub maxiter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 1e-10,
            restart: 50,
            maxiter: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresSolution {
    pub solution: ComplexField,
    /// Total inner iterations.
    pub iterations: usize,
    /// True relative residual of `solution`.
    pub relative_residual: f64,
    /// Estimated relative residual after each inner iteration.
    pub history: Vec<f64>,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex Givens rotation `(c, s)` zeroing `b` against `a`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let d = an.hypot(b.norm());
    if d == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    (an / d, (a / an) * b.conj() / d)
}

/// Restarted GMRES with modified Gram-Schmidt from a zero initial guess.
pub fn gmres_solve<A: LinearOperator + ?Sized>(
    op: &mut A,
    rhs: &ComplexField,
    opts: &GmresOptions,
) -> Result<GmresSolution> {
    if !(opts.tol > 0.0) || opts.restart == 0 {
        return Err(Error::InvalidParameter(format!(
            "GMRES needs tol > 0 and restart >= 1, got {} and {}",
            opts.tol, opts.restart
        )));
    }
    let grid = *rhs.grid();
    let b = rhs.values();
    let len = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    let mut x = vec![zero; len];
    if bnorm == 0.0 {
        return Ok(GmresSolution {
            solution: ComplexField::zeros(grid),
            iterations: 0,
            relative_residual: 0.0,
            history: vec![0.0],
        });
    }
    let mut r = b.to_vec();
    let mut rnorm = bnorm;
    let mut total = 0;
    let mut history = vec![1.0];
    let mut w = vec![zero; len];
    let m = opts.restart;
    loop {
        if total >= opts.maxiter {
            return Err(Error::MaxIterations {
                iterations: total,
                residual: rnorm / bnorm,
                best: Box::new(ComplexField::from_values(grid, x)?),
            });
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / rnorm).collect()];
        // column-major Hessenberg, column k has k + 2 entries
        let mut hess: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(rnorm, 0.0);
        let mut k = 0;
        while k < m && total < opts.maxiter {
            op.apply(&basis[k], &mut w);
            let mut col = vec![zero; k + 2];
            for (i, v) in basis.iter().enumerate() {
                let h: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= h * vi;
                }
                col[i] = h;
            }
            let hnext = norm(&w);
            col[k + 1] = Complex64::new(hnext, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (p, q) = (col[i], col[i + 1]);
                col[i] = p * c + s * q;
                col[i + 1] = -s.conj() * p + q * c;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            col[k] = col[k] * c + s * col[k + 1];
            col[k + 1] = zero;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            rot.push((c, s));
            hess.push(col);
            total += 1;
            k += 1;
            let est = g[k].norm() / bnorm;
            history.push(est);
            if est <= opts.tol || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
        // back substitution for the k x k triangle
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in (i + 1)..k {
                s -= hess[j][i] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
        drop(basis);
        op.apply(&x, &mut w);
        for ((ri, bi), wi) in r.iter_mut().zip(b).zip(&w) {
            *ri = bi - wi;
        }
        rnorm = norm(&r);
        if rnorm / bnorm <= opts.tol {
            return Ok(GmresSolution {
                solution: ComplexField::from_values(grid, x)?,
                iterations: total,
                relative_residual: rnorm / bnorm,
                history,
            });
        }
        if !rnorm.is_finite() {
            return Err(Error::InvalidParameter("GMRES produced a non-finite residual".into()));
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub total_field: ComplexField,
    pub scattered_field: ComplexField,
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub history: Vec<f64>,
    /// Wall time of the GMRES phase in seconds.
    pub solve_seconds: f64,
}

/// Solves with a prepared operator state.
pub fn solve_with_state(
    state: &mut OperatorState,
    setup: &ProblemSetup,
    opts: &GmresOptions,
) -> Result<SolveResult> {
    let g = *state.grid();
    let inc = sample_incident(&setup.incident, setup.kappa, &g);
    let t = Instant::now();
    let sol = gmres_solve(state, &inc, opts)?;
    let solve_seconds = t.elapsed().as_secs_f64();
    let scattered_field = sol.solution.sub(&inc)?;
    Ok(SolveResult {
        total_field: sol.solution,
        scattered_field,
        iterations: sol.iterations,
        final_relative_residual: sol.relative_residual,
        history: sol.history,
        solve_seconds,
    })
}

/// Full pipeline: weights, contrast, indicator, GMRES.
pub fn solve_scattering(setup: &ProblemSetup, opts: &GmresOptions) -> Result<SolveResult> {
    let mut state = OperatorState::new(setup)?;
    solve_with_state(&mut state, setup, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::windowing::ContrastExtension;

    fn setup(n: usize, m: f64) -> ProblemSetup {
        let g = GridSpec::new(1.1, n).unwrap();
        let c = ContrastSpec::new(ContrastExtension::Constant(m), Shape::disc([0.0, 0.0], 1.0));
        let w = WindowParams::new(1.01, 1.08).unwrap();
        let mut s = ProblemSetup::new(g, 10.0, c, w, IncidentField::RadialBessel);
        s.beta = Some(0.156101596108444);
        s
    }

    #[test]
    fn incident_samples() {
        let g = GridSpec::new(1.0, 4).unwrap();
        let pw = IncidentField::plane_wave([1.0, 0.0]).unwrap();
        // node 2 sits at x1 = 0
        let u = sample_incident(&pw, 3.0, &g);
        for j2 in 0..4 {
            assert!((u.get(2, j2) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        // node 3 sits at x1 = 0.5
        let u = sample_incident(&pw, std::f64::consts::PI, &g);
        assert!((u.get(3, 0) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let j = sample_incident(&IncidentField::RadialBessel, 7.0, &g);
        assert_eq!(j.get(2, 2), Complex64::new(1.0, 0.0));
        assert!(IncidentField::plane_wave([1.0, 0.1]).is_err());
    }

    #[test]
    fn zero_contrast_is_identity() {
        let s = setup(16, 0.0);
        let r = solve_scattering(&s, &GmresOptions::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.scattered_field.values().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn setup_validation() {
        let mut s = setup(16, -0.5);
        s.smoothing = Smoothing::Fourier(9);
        assert!(matches!(s.validate(), Err(Error::FTooLarge { .. })));
        s.smoothing = Smoothing::Fourier(0);
        assert!(s.validate().is_err());
        s.smoothing = Smoothing::None;
        s.kappa = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn gmres_rotation_zeroes_subdiagonal() {
        let a = Complex64::new(0.3, -1.2);
        let b = Complex64::new(0.7, 0.0);
        let (c, s) = givens(a, b);
        let low = -s.conj() * a + b * c;
        assert!(low.norm() < 1e-15);
        assert!(((a * c + s * b).norm() - a.norm().hypot(b.norm())).abs() < 1e-15);
    }

    #[test]
    fn gmres_reports_max_iterations() {
        let s = setup(16, -0.5);
        let mut state = OperatorState::new(&s).unwrap();
        let rhs = sample_incident(&s.incident, s.kappa, &s.grid);
        let opts = GmresOptions {
            tol: 1e-14,
            restart: 3,
            maxiter: 4,
        };
        match gmres_solve(&mut state, &rhs, &opts) {
            Err(Error::MaxIterations { iterations, best, .. }) => {
                assert_eq!(iterations, 4);
                assert!(best.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
