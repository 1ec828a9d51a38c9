//! Convergence studies, single cases and timing runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec, Point};
use crate::oracle::{MieSeries, RadialSolution};
use crate::quadrature::{load_or_compute_beta, DEFAULT_BETA_TOL};
use crate::solver::{
    sample_incident, solve_with_state, IncidentField, OperatorState, SolveResult, Smoothing,
};

use super::config::{CaseConfig, Mode, Output, Reference};
use super::io::{
    write_field_csv, write_field_dump, CoefficientCache, ConvergenceRow, CsvSink, TimingRow,
    CONVERGENCE_HEADER, TIMING_HEADER,
};
use super::metrics::{eps2, eps_inf};

/// Shared resources of a run: `beta` and the coefficient cache.
#[derive(Clone, Debug)]
pub struct Context {
    pub beta: f64,
    pub cache: CoefficientCache,
}

impl Context {
    /// Uses `cfg.beta` when set, else the cached or freshly calibrated value
    /// in the cache directory (`cfg.cache_dir`, else `out/cache`).
    pub fn new(cfg: &CaseConfig, out: &Path) -> Result<Self> {
        let dir = cfg.cache_dir.clone().unwrap_or_else(|| out.join("cache"));
        let beta = match cfg.beta {
            Some(b) => b,
            None => load_or_compute_beta(&dir, DEFAULT_BETA_TOL)?,
        };
        Ok(Context {
            beta,
            cache: CoefficientCache::new(dir),
        })
    }
}

/// Builds the operator on the `n` grid and solves.
pub fn solve_at(cfg: &CaseConfig, ctx: &Context, n: usize, mode: Mode) -> Result<SolveResult> {
    let mut state = prepare(cfg, ctx, n, mode)?;
    let mut setup = cfg.setup(n, mode)?;
    setup.beta = Some(ctx.beta);
    solve_with_state(&mut state, &setup, &cfg.solver)
}

/// Operator state on the `n` grid, with cached coefficients.
pub fn prepare(cfg: &CaseConfig, ctx: &Context, n: usize, mode: Mode) -> Result<OperatorState> {
    let mut setup = cfg.setup(n, mode)?;
    setup.beta = Some(ctx.beta);
    let coeffs = match setup.smoothing {
        Smoothing::Fourier(f) => Some(ctx.cache.get_or_compute(
            &setup.contrast.shape,
            f,
            cfg.a,
            cfg.coeff_tol,
        )?),
        Smoothing::None => None,
    };
    OperatorState::with_coefficients(&setup, coeffs.as_ref())
}

/// Analytic total field on `g` for the disc configurations.
pub fn analytic_field(cfg: &CaseConfig, g: &GridSpec) -> Result<ComplexField> {
    let p = cfg.analytic_params()?;
    match cfg.incident {
        IncidentField::RadialBessel => {
            let s = RadialSolution::new(&p)?;
            Ok(ComplexField::from_fn(*g, |x| s.eval(x)))
        }
        IncidentField::PlaneWave { direction: d } => {
            let s = MieSeries::new(&p, p.default_nmax())?;
            let mut values = Vec::with_capacity(g.len());
            for i in 0..g.len() {
                let x = g.node_flat(i);
                // rotate so the wave travels along x1
                let xr: Point = [d[0] * x[0] + d[1] * x[1], -d[1] * x[0] + d[0] * x[1]];
                values.push(s.eval(xr)?);
            }
            ComplexField::from_values(*g, values)
        }
    }
}

/// Runs the study over `cfg.grids` in `mode`. The CSV goes to
/// `out/<name>_<mode>_convergence.csv` when requested.
pub fn run_convergence(cfg: &CaseConfig, mode: Mode, out: &Path) -> Result<Vec<ConvergenceRow>> {
    let ctx = Context::new(cfg, out)?;
    let reference = match cfg.reference {
        Reference::Analytic => None,
        Reference::NestedFiner { .. } => {
            let n_ref = cfg.n_ref().expect("nested reference has n_ref");
            Some(solve_at(cfg, &ctx, n_ref, Mode::Fspt)?.total_field)
        }
    };
    run_convergence_with(cfg, mode, out, &ctx, reference.as_ref())
}

/// As [`run_convergence`] with a precomputed nested reference.
pub fn run_convergence_with(
    cfg: &CaseConfig,
    mode: Mode,
    out: &Path,
    ctx: &Context,
    reference: Option<&ComplexField>,
) -> Result<Vec<ConvergenceRow>> {
    let mut sink = if cfg.outputs.contains(&Output::ConvergenceCsv) {
        let path = out.join(format!("{}_{}_convergence.csv", cfg.name, mode_name(mode)));
        Some(CsvSink::create(&path, CONVERGENCE_HEADER)?)
    } else {
        None
    };
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in &cfg.grids {
        let t = Instant::now();
        let res = solve_at(cfg, ctx, n, mode)?;
        let seconds = t.elapsed().as_secs_f64();
        let g = *res.total_field.grid();
        let exact = match reference {
            Some(r) => r.restrict_to(&g)?,
            None => analytic_field(cfg, &g)?,
        };
        let e2 = eps2(&res.total_field, &exact)?;
        let ei = eps_inf(&res.total_field, &exact)?;
        let order = |prev: f64, cur: f64, nc: usize| {
            if prev > 0.0 && cur > 0.0 {
                Some((prev / cur).ln() / (n as f64 / nc as f64).ln())
            } else {
                None
            }
        };
        let (noc2, noc_inf) = match rows.last() {
            Some(p) => (order(p.eps2, e2, p.n), order(p.eps_inf, ei, p.n)),
            None => (None, None),
        };
        let row = ConvergenceRow {
            n,
            f: match cfg.smoothing(n, mode) {
                Smoothing::Fourier(f) => f,
                Smoothing::None => 0,
            },
            eps2: e2,
            noc2,
            eps_inf: ei,
            noc_inf,
            iterations: res.iterations,
            seconds,
        };
        if let Some(s) = sink.as_mut() {
            s.row(&row.to_csv())?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Fspt => "fspt",
        Mode::Plain => "plain",
    }
}

/// Files written by [`run_case`].
#[derive(Clone, Debug, Default)]
pub struct CaseFiles {
    pub total: Option<PathBuf>,
    pub scattered: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Single solve at `cfg.solve_n()`, dumping `u` and `u^s` when requested.
pub fn run_case(cfg: &CaseConfig, mode: Mode, out: &Path) -> Result<(SolveResult, CaseFiles)> {
    let ctx = Context::new(cfg, out)?;
    let n = cfg.solve_n()?;
    let res = solve_at(cfg, &ctx, n, mode)?;
    let mut files = CaseFiles::default();
    if cfg.outputs.contains(&Output::FieldDump) {
        let stem = format!("{}_{}_n{n}", cfg.name, mode_name(mode));
        let total = out.join(format!("{stem}_total.lsf"));
        let scattered = out.join(format!("{stem}_scattered.lsf"));
        write_field_dump(&total, &res.total_field, cfg.kappa)?;
        write_field_dump(&scattered, &res.scattered_field, cfg.kappa)?;
        files.total = Some(total);
        files.scattered = Some(scattered);
        if cfg.field_csv {
            let csv = out.join(format!("{stem}_total.csv"));
            write_field_csv(&csv, &res.total_field)?;
            files.csv = Some(csv);
        }
    }
    Ok((res, files))
}

/// Per-grid cost of one operator application (median of five) and of the
/// full solve.
pub fn run_timing(cfg: &CaseConfig, mode: Mode, out: &Path) -> Result<Vec<TimingRow>> {
    if cfg.grids.is_empty() {
        return Err(Error::Config("timing needs a grid list".into()));
    }
    let ctx = Context::new(cfg, out)?;
    let mut sink = if cfg.outputs.contains(&Output::TimingCsv) {
        let path = out.join(format!("{}_{}_timing.csv", cfg.name, mode_name(mode)));
        Some(CsvSink::create(&path, TIMING_HEADER)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &n in &cfg.grids {
        let mut state = prepare(cfg, &ctx, n, mode)?;
        let t_apply = time_apply(&mut state, 5);
        let mut setup = cfg.setup(n, mode)?;
        setup.beta = Some(ctx.beta);
        let res = solve_with_state(&mut state, &setup, &cfg.solver)?;
        let row = TimingRow {
            n,
            t_apply,
            t_solve: res.solve_seconds,
            iterations: res.iterations,
        };
        if let Some(s) = sink.as_mut() {
            s.row(&row.to_csv())?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Median wall time in seconds of `reps` operator applications.
pub fn time_apply(state: &mut OperatorState, reps: usize) -> f64 {
    let g = *state.grid();
    let u = sample_incident(
        &IncidentField::PlaneWave {
            direction: [1.0, 0.0],
        },
        3.0,
        &g,
    );
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    state.apply_slice(u.values(), &mut out);
    let mut times: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let t = Instant::now();
            state.apply_slice(u.values(), &mut out);
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(|a, b| a.total_cmp(b));
    times[times.len() / 2]
}
