//! File formats: field dumps, indicator coefficient cache, CSV tables.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{indicator_coeffs, IndicatorCoeffs, Shape};
use crate::grid::{ComplexField, GridSpec};

const FIELD_MAGIC: &[u8; 4] = b"LSF1";
const COEFF_MAGIC: &[u8; 4] = b"LSC1";

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_complex(w: &mut impl Write, values: &[Complex64]) -> std::io::Result<()> {
    for v in values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

fn read_i64(bytes: &[u8], at: usize) -> i64 {
    i64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

fn read_complex(bytes: &[u8]) -> Vec<Complex64> {
    bytes
        .chunks_exact(16)
        .map(|c| Complex64::new(read_f64(c, 0), read_f64(c, 8)))
        .collect()
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    Ok(bytes)
}

/// Writes `LSF1 | a | n | kappa | n^2 complex128`, all little-endian.
pub fn write_field_dump(path: &Path, field: &ComplexField, kappa: f64) -> Result<()> {
    let g = field.grid();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    w.write_all(FIELD_MAGIC).map_err(io)?;
    w.write_all(&g.a().to_le_bytes()).map_err(io)?;
    w.write_all(&(g.n() as i64).to_le_bytes()).map_err(io)?;
    w.write_all(&kappa.to_le_bytes()).map_err(io)?;
    write_complex(&mut w, field.values()).map_err(io)?;
    w.flush().map_err(io)
}

/// Reads a field dump, returning the field and its wavenumber.
pub fn read_field_dump(path: &Path) -> Result<(ComplexField, f64)> {
    let bytes = read_all(path)?;
    if bytes.len() < 28 || &bytes[..4] != FIELD_MAGIC {
        return Err(format_err(path, "missing LSF1 header"));
    }
    let a = read_f64(&bytes, 4);
    let n = read_i64(&bytes, 12);
    let kappa = read_f64(&bytes, 20);
    if n <= 0 {
        return Err(format_err(path, format!("grid size {n}")));
    }
    let n = n as usize;
    let body = &bytes[28..];
    if body.len() != 16 * n * n {
        return Err(format_err(path, format!("expected {} samples", n * n)));
    }
    let grid = GridSpec::new(a, n).map_err(|e| format_err(path, e.to_string()))?;
    Ok((ComplexField::from_values(grid, read_complex(body))?, kappa))
}

/// Companion CSV with columns `x1,x2,re_u,im_u`.
pub fn write_field_csv(path: &Path, field: &ComplexField) -> Result<()> {
    let g = *field.grid();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "x1,x2,re_u,im_u").map_err(io)?;
    for (i, v) in field.values().iter().enumerate() {
        let x = g.node_flat(i);
        writeln!(w, "{:e},{:e},{:e},{:e}", x[0], x[1], v.re, v.im).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes `LSC1 | F | a | tol | sha256(shape) | (2F+1)^2 complex128`.
pub fn write_coeffs(path: &Path, c: &IndicatorCoeffs, tol: f64, shape_hash: &[u8; 32]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    w.write_all(COEFF_MAGIC).map_err(io)?;
    w.write_all(&(c.f() as i64).to_le_bytes()).map_err(io)?;
    w.write_all(&c.a().to_le_bytes()).map_err(io)?;
    w.write_all(&tol.to_le_bytes()).map_err(io)?;
    w.write_all(shape_hash).map_err(io)?;
    write_complex(&mut w, c.values()).map_err(io)?;
    w.flush().map_err(io)
}

/// Reads a coefficient file as `(coeffs, tol, shape_hash)`.
pub fn read_coeffs(path: &Path) -> Result<(IndicatorCoeffs, f64, [u8; 32])> {
    let bytes = read_all(path)?;
    if bytes.len() < 60 || &bytes[..4] != COEFF_MAGIC {
        return Err(format_err(path, "missing LSC1 header"));
    }
    let f = read_i64(&bytes, 4);
    let a = read_f64(&bytes, 12);
    let tol = read_f64(&bytes, 20);
    let mut hash = [0u8; 32];
    hash.copy_from_slice(&bytes[28..60]);
    if f < 0 {
        return Err(format_err(path, format!("F = {f}")));
    }
    let side = 2 * f as usize + 1;
    let body = &bytes[60..];
    if body.len() != 16 * side * side {
        return Err(format_err(path, format!("expected {} coefficients", side * side)));
    }
    let c = IndicatorCoeffs::new(f as usize, a, read_complex(body))
        .map_err(|e| format_err(path, e.to_string()))?;
    Ok((c, tol, hash))
}

/// Directory of cached indicator coefficients, keyed by shape hash, `F`
/// and `a`.
#[derive(Clone, Debug)]
pub struct CoefficientCache {
    dir: PathBuf,
}

impl CoefficientCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CoefficientCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, hash: &[u8; 32], f: usize, a: f64) -> PathBuf {
        let hex: String = hash[..8].iter().map(|b| format!("{b:02x}")).collect();
        self.dir
            .join(format!("chi_{hex}_F{f}_a{:016x}.lsc", a.to_bits()))
    }

    /// Cached coefficients when present and at least as accurate as `tol`,
    /// otherwise computed and stored. Closed-form shapes bypass the cache.
    pub fn get_or_compute(&self, shape: &Shape, f: usize, a: f64, tol: f64) -> Result<IndicatorCoeffs> {
        if matches!(shape, Shape::Disc { .. } | Shape::Rect { .. }) {
            return indicator_coeffs(shape, f, a, tol);
        }
        let hash = shape.hash();
        let path = self.path(&hash, f, a);
        if path.exists() {
            if let Ok((c, stored_tol, stored_hash)) = read_coeffs(&path) {
                if stored_hash == hash && c.f() == f && c.a() == a && stored_tol <= tol {
                    return Ok(c);
                }
            }
        }
        let c = indicator_coeffs(shape, f, a, tol)?;
        write_coeffs(&path, &c, tol, &hash)?;
        Ok(c)
    }
}

/// One row of a convergence table; orders are absent on the first row.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub f: usize,
    pub eps2: f64,
    pub noc2: Option<f64>,
    pub eps_inf: f64,
    pub noc_inf: Option<f64>,
    pub iterations: usize,
    pub seconds: f64,
}

pub const CONVERGENCE_HEADER: &str = "n,F,eps2,nocsq,epsinf,nocinf,iters,seconds";

fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

fn opt_sci(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

impl ConvergenceRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.f,
            sci(self.eps2),
            opt_sci(self.noc2),
            sci(self.eps_inf),
            opt_sci(self.noc_inf),
            self.iterations,
            sci(self.seconds)
        )
    }

    pub fn from_csv(line: &str) -> Option<Self> {
        let p: Vec<&str> = line.trim().split(',').collect();
        if p.len() != 8 {
            return None;
        }
        let opt = |s: &str| if s.is_empty() { Some(None) } else { s.parse().ok().map(Some) };
        Some(ConvergenceRow {
            n: p[0].parse().ok()?,
            f: p[1].parse().ok()?,
            eps2: p[2].parse().ok()?,
            noc2: opt(p[3])?,
            eps_inf: p[4].parse().ok()?,
            noc_inf: opt(p[5])?,
            iterations: p[6].parse().ok()?,
            seconds: p[7].parse().ok()?,
        })
    }
}

/// Incremental CSV writer: every row is flushed, so a failed study leaves
/// the rows finished so far.
pub struct CsvSink {
    path: PathBuf,
    w: BufWriter<File>,
}

impl CsvSink {
    pub fn create(path: &Path, header: &str) -> Result<Self> {
        let mut w = create(path)?;
        writeln!(w, "{header}")
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))?;
        Ok(CsvSink {
            path: path.to_path_buf(),
            w,
        })
    }

    pub fn row(&mut self, line: &str) -> Result<()> {
        writeln!(self.w, "{line}")
            .and_then(|_| self.w.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// Parses a convergence CSV written by this crate.
pub fn read_convergence_csv(path: &Path) -> Result<Vec<ConvergenceRow>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 {
            if line.trim() != CONVERGENCE_HEADER {
                return Err(format_err(path, "unexpected header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            ConvergenceRow::from_csv(&line)
                .ok_or_else(|| format_err(path, format!("bad row {}", i + 1)))?,
        );
    }
    Ok(rows)
}

/// One row of a timing table.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub t_apply: f64,
    pub t_solve: f64,
    pub iterations: usize,
}

pub const TIMING_HEADER: &str = "n,N,t_apply,t_solve,iterations";

impl TimingRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n,
            self.n * self.n,
            sci(self.t_apply),
            sci(self.t_solve),
            self.iterations
        )
    }
}
