//! Python bindings: grids and fields, case configurations, solves and
//! convergence studies, the analytic disc solutions and the special
//! functions.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lsscatter::grid::{ComplexField, GridSpec};
use lsscatter::harness::cli::{exit_code, EXIT_IO, EXIT_NOT_CONVERGED};
use lsscatter::harness::io::CoefficientCache;
use lsscatter::harness::study::{run_convergence_with, solve_at, Context};
use lsscatter::harness::{self, presets, CaseConfig, Mode, Reference};
use lsscatter::oracle::{DiscScatteringParams, MieSeries, RadialSolution};
use lsscatter::quadrature;
use lsscatter::specfun;
use lsscatter::Error;

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match exit_code(&e) {
        EXIT_IO => PyIOError::new_err(msg),
        EXIT_NOT_CONVERGED => PyRuntimeError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "fspt" => Ok(Mode::Fspt),
        "plain" => Ok(Mode::Plain),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'fspt' or 'plain', got {other:?}"
        ))),
    }
}

/// Uniform `n x n` grid on `[-a, a)^2`.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid(GridSpec);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(a: f64, n: usize) -> PyResult<Self> {
        GridSpec::new(a, n).map(PyGrid).map_err(to_py)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    fn node(&self, j1: usize, j2: usize) -> PyResult<(f64, f64)> {
        if j1 >= self.0.n() || j2 >= self.0.n() {
            return Err(PyValueError::new_err("node index out of range"));
        }
        let x = self.0.node(j1, j2);
        Ok((x[0], x[1]))
    }

    fn __repr__(&self) -> String {
        format!("Grid(a={}, n={})", self.0.a(), self.0.n())
    }
}

/// Complex nodal values on a grid, row-major with `j1` outer.
#[pyclass(name = "Field", frozen)]
struct PyField(ComplexField);

#[pymethods]
impl PyField {
    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    fn values(&self) -> Vec<Complex64> {
        self.0.values().to_vec()
    }

    fn get(&self, j1: usize, j2: usize) -> PyResult<Complex64> {
        let n = self.0.grid().n();
        if j1 >= n || j2 >= n {
            return Err(PyValueError::new_err("node index out of range"));
        }
        Ok(self.0.get(j1, j2))
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }
}

/// Outcome of one solve.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    #[pyo3(get)]
    total: Py<PyField>,
    #[pyo3(get)]
    scattered: Py<PyField>,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    history: Vec<f64>,
    #[pyo3(get)]
    seconds: f64,
}

/// A case configuration, as read from the JSON case files.
#[pyclass(name = "Case", skip_from_py_object)]
#[derive(Clone)]
struct PyCase(CaseConfig);

impl PyCase {
    fn context(&self, cache_dir: Option<PathBuf>) -> Context {
        let dir = cache_dir
            .or_else(|| self.0.cache_dir.clone())
            .unwrap_or_else(|| std::env::temp_dir().join("lsscatter-cache"));
        Context {
            beta: self.0.beta.unwrap_or_else(quadrature::default_beta),
            cache: CoefficientCache::new(dir),
        }
    }
}

#[pymethods]
impl PyCase {
    /// Built-in case: `example1`, `corner`, `cusp`, `cusp_figure` or
    /// `table2` (which takes `kappa`, default `100 pi`).
    #[staticmethod]
    #[pyo3(signature = (name, kappa=None))]
    fn preset(name: &str, kappa: Option<f64>) -> PyResult<Self> {
        let cfg = match name {
            "example1" => presets::example1(),
            "corner" => presets::corner(),
            "cusp" => presets::cusp(),
            "cusp_figure" => presets::cusp_figure(),
            "table2" => presets::table2_qualitative(kappa.unwrap_or(100.0 * std::f64::consts::PI)),
            other => return Err(PyValueError::new_err(format!("unknown preset {other:?}"))),
        };
        Ok(PyCase(cfg))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CaseConfig::from_json(text).map(PyCase).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (path, overrides=Vec::new()))]
    fn load(path: PathBuf, overrides: Vec<String>) -> PyResult<Self> {
        CaseConfig::load(&path, &overrides).map(PyCase).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    /// Applies a `key=value` override; dotted keys reach nested fields.
    fn set(&mut self, spec: &str) -> PyResult<()> {
        self.0 = self.0.with_overrides(&[spec.to_string()]).map_err(to_py)?;
        Ok(())
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa
    }

    #[getter]
    fn grids(&self) -> Vec<usize> {
        self.0.grids.clone()
    }

    /// Solves on the `n` grid (default: the configured single-solve grid).
    #[pyo3(signature = (n=None, mode=None, cache_dir=None))]
    fn solve(
        &self,
        py: Python<'_>,
        n: Option<usize>,
        mode: Option<&str>,
        cache_dir: Option<PathBuf>,
    ) -> PyResult<PySolution> {
        let mode = mode.map(parse_mode).transpose()?.unwrap_or(self.0.mode);
        let n = match n {
            Some(n) => n,
            None => self.0.solve_n().map_err(to_py)?,
        };
        let cfg = self.0.clone();
        let ctx = self.context(cache_dir);
        let res = py.detach(move || solve_at(&cfg, &ctx, n, mode)).map_err(to_py)?;
        Ok(PySolution {
            total: Py::new(py, PyField(res.total_field))?,
            scattered: Py::new(py, PyField(res.scattered_field))?,
            iterations: res.iterations,
            residual: res.final_relative_residual,
            history: res.history,
            seconds: res.solve_seconds,
        })
    }

    /// Convergence study over the configured grids; one dict per grid.
    #[pyo3(signature = (mode=None, out=None, cache_dir=None))]
    fn converge<'py>(
        &self,
        py: Python<'py>,
        mode: Option<&str>,
        out: Option<PathBuf>,
        cache_dir: Option<PathBuf>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let mode = mode.map(parse_mode).transpose()?.unwrap_or(self.0.mode);
        let mut cfg = self.0.clone();
        let out = match out {
            Some(dir) => {
                std::fs::create_dir_all(&dir).map_err(|e| PyIOError::new_err(e.to_string()))?;
                dir
            }
            None => {
                cfg.outputs.clear();
                PathBuf::from(".")
            }
        };
        let ctx = self.context(cache_dir);
        let rows = py
            .detach(move || {
                let reference = match cfg.reference {
                    Reference::Analytic => None,
                    Reference::NestedFiner { .. } => {
                        let n_ref = cfg.n_ref().expect("nested reference has n_ref");
                        Some(solve_at(&cfg, &ctx, n_ref, Mode::Fspt)?.total_field)
                    }
                };
                run_convergence_with(&cfg, mode, &out, &ctx, reference.as_ref())
            })
            .map_err(to_py)?;
        rows.into_iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("n", r.n)?;
                d.set_item("F", r.f)?;
                d.set_item("eps2", r.eps2)?;
                d.set_item("noc2", r.noc2)?;
                d.set_item("eps_inf", r.eps_inf)?;
                d.set_item("noc_inf", r.noc_inf)?;
                d.set_item("iterations", r.iterations)?;
                d.set_item("seconds", r.seconds)?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Case(name={:?}, kappa={})", self.0.name, self.0.kappa)
    }
}

/// Self-calibrated lattice constant of the corrected diagonal weight.
#[pyfunction]
#[pyo3(signature = (tol=quadrature::DEFAULT_BETA_TOL))]
fn compute_beta(py: Python<'_>, tol: f64) -> PyResult<f64> {
    py.detach(|| quadrature::compute_beta(tol)).map_err(to_py)
}

#[pyfunction]
fn eps2(approx: &PyField, exact: &PyField) -> PyResult<f64> {
    harness::eps2(&approx.0, &exact.0).map_err(to_py)
}

#[pyfunction]
fn eps_inf(approx: &PyField, exact: &PyField) -> PyResult<f64> {
    harness::eps_inf(&approx.0, &exact.0).map_err(to_py)
}

/// Observed order from the errors on grids `n` and `2n`.
#[pyfunction]
fn noc(e_coarse: f64, e_fine: f64) -> PyResult<f64> {
    harness::noc(e_coarse, e_fine).map_err(to_py)
}

/// Total field of a constant-contrast disc at the origin for
/// `u^i = J0(kappa |x|)`.
#[pyfunction]
fn disc_radial(kappa: f64, radius: f64, m: f64, points: Vec<(f64, f64)>) -> PyResult<Vec<Complex64>> {
    let p = DiscScatteringParams::new(kappa, radius, m).map_err(to_py)?;
    let s = RadialSolution::new(&p).map_err(to_py)?;
    Ok(points.iter().map(|&(x, y)| s.eval([x, y])).collect())
}

/// Total field of a constant-contrast disc at the origin for
/// `u^i = exp(i kappa x1)`.
#[pyfunction]
#[pyo3(signature = (kappa, radius, m, points, nmax=None))]
fn disc_plane_wave(
    kappa: f64,
    radius: f64,
    m: f64,
    points: Vec<(f64, f64)>,
    nmax: Option<usize>,
) -> PyResult<Vec<Complex64>> {
    let p = DiscScatteringParams::new(kappa, radius, m).map_err(to_py)?;
    let s = MieSeries::new(&p, nmax.unwrap_or_else(|| p.default_nmax())).map_err(to_py)?;
    points.iter().map(|&(x, y)| s.eval([x, y]).map_err(to_py)).collect()
}

#[pyfunction]
fn bessel_j0(x: f64) -> PyResult<f64> {
    specfun::bessel_j0(x).map_err(to_py)
}

#[pyfunction]
fn bessel_j1(x: f64) -> PyResult<f64> {
    specfun::bessel_j1(x).map_err(to_py)
}

#[pyfunction]
fn bessel_y0(x: f64) -> PyResult<f64> {
    specfun::bessel_y0(x).map_err(to_py)
}

#[pyfunction]
fn bessel_y1(x: f64) -> PyResult<f64> {
    specfun::bessel_y1(x).map_err(to_py)
}

#[pyfunction]
fn hankel0(x: f64) -> PyResult<Complex64> {
    specfun::hankel0(x).map_err(to_py)
}

#[pyfunction]
fn hankel1(x: f64) -> PyResult<Complex64> {
    specfun::hankel1(x).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "lsscatter")]
fn lsscatter_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyCase>()?;
    m.add_function(wrap_pyfunction!(compute_beta, m)?)?;
    m.add_function(wrap_pyfunction!(eps2, m)?)?;
    m.add_function(wrap_pyfunction!(eps_inf, m)?)?;
    m.add_function(wrap_pyfunction!(noc, m)?)?;
    m.add_function(wrap_pyfunction!(disc_radial, m)?)?;
    m.add_function(wrap_pyfunction!(disc_plane_wave, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j0, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j1, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_y0, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_y1, m)?)?;
    m.add_function(wrap_pyfunction!(hankel0, m)?)?;
    m.add_function(wrap_pyfunction!(hankel1, m)?)?;
    Ok(())
}
