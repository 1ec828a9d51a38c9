//! FFT machinery: Toeplitz convolution through a `2n x 2n` circulant
//! embedding, and exact nodal evaluation of the truncated indicator series.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::IndicatorCoeffs;
use crate::grid::{ComplexField, GridSpec};
use crate::quadrature::KernelTable;

/// Square 2D FFT of side `m` built from row transforms and transposes.
///
/// Spectra are left in transposed layout; a forward/inverse pair restores
/// the original layout, which is all the convolution needs.
pub(crate) struct Fft2 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Fft2 {
    pub(crate) fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Fft2 {
            m,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            tmp: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    /// Forward transform; only the first `rows` rows of `data` may be nonzero.
    pub(crate) fn forward(&mut self, data: &mut [Complex64], rows: usize) {
        let m = self.m;
        self.forward
            .process_with_scratch(&mut data[..rows * m], &mut self.scratch);
        transpose(data, &mut self.tmp, m);
        self.forward.process_with_scratch(&mut self.tmp, &mut self.scratch);
        data.copy_from_slice(&self.tmp);
    }

    /// Inverse (unnormalized) transform of a transposed spectrum; only the
    /// first `rows` rows of the result are computed.
    pub(crate) fn inverse(&mut self, data: &mut [Complex64], rows: usize) {
        let m = self.m;
        self.inverse.process_with_scratch(data, &mut self.scratch);
        transpose(data, &mut self.tmp, m);
        self.inverse
            .process_with_scratch(&mut self.tmp[..rows * m], &mut self.scratch);
        data[..rows * m].copy_from_slice(&self.tmp[..rows * m]);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    const B: usize = 32;
    for ib in (0..m).step_by(B) {
        for jb in (0..m).step_by(B) {
            for i in ib..(ib + B).min(m) {
                for j in jb..(jb + B).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}

/// Transform of a kernel generator, in the layout [`ConvWorkspace`] uses.
pub(crate) fn generator_spectrum(samples: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = 2 * n;
    let mut spec = samples.to_vec();
    Fft2::new(m).forward(&mut spec, m);
    spec
}

/// Scratch buffers for repeated convolutions on one grid. Not shareable
/// between concurrent solves.
pub struct ConvWorkspace {
    n: usize,
    fft: Fft2,
    buf: Vec<Complex64>,
}

impl ConvWorkspace {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n();
        let m = 2 * n;
        ConvWorkspace {
            n,
            fft: Fft2::new(m),
            buf: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    /// `out_j = sum_k w_{|j-k|} density_k` for flat `n x n` slices.
    pub fn apply(&mut self, kt: &KernelTable, density: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let m = 2 * n;
        self.buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for j1 in 0..n {
            self.buf[j1 * m..j1 * m + n].copy_from_slice(&density[j1 * n..(j1 + 1) * n]);
        }
        self.fft.forward(&mut self.buf, n);
        let scale = 1.0 / (m * m) as f64;
        for (b, s) in self.buf.iter_mut().zip(kt.spectrum()) {
            *b *= s * scale;
        }
        self.fft.inverse(&mut self.buf, n);
        for j1 in 0..n {
            out[j1 * n..(j1 + 1) * n].copy_from_slice(&self.buf[j1 * m..j1 * m + n]);
        }
    }
}

/// Applies the Toeplitz weight matrix of `kt` to `density`.
pub fn toeplitz_apply(kt: &KernelTable, density: &ComplexField) -> Result<ComplexField> {
    kt.grid().ensure_same(density.grid())?;
    let mut ws = ConvWorkspace::new(kt.grid());
    let mut out = ComplexField::zeros(*kt.grid());
    ws.apply(kt, density.values(), out.values_mut());
    Ok(out)
}

/// Values of the truncated series `chi_D^F` at the grid nodes.
///
/// At `x_j = -(a, a) + h (j1, j2)` the mode `(j, k)` equals
/// `(-1)^{j+k} exp(2 pi i (j j1 + k k2) / n)`, so the modes fold into DFT
/// bins `(j mod n, k mod n)` and one inverse DFT gives the nodal values.
pub fn eval_smoothed_indicator(ic: &IndicatorCoeffs, g: &GridSpec) -> Result<ComplexField> {
    let n = g.n();
    let f = ic.f();
    if f > n / 2 {
        return Err(Error::FTooLarge { f, half: n / 2 });
    }
    if ic.a() != g.a() {
        return Err(Error::InvalidParameter(format!(
            "coefficients are for a = {}, grid has a = {}",
            ic.a(),
            g.a()
        )));
    }
    let fi = f as i64;
    let ni = n as i64;
    let mut bins = vec![Complex64::new(0.0, 0.0); n * n];
    for j in -fi..=fi {
        let p = j.rem_euclid(ni) as usize;
        for k in -fi..=fi {
            let q = k.rem_euclid(ni) as usize;
            let sign = if (j + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            bins[p * n + q] += ic.get(j, k) * sign;
        }
    }
    let mut planner = FftPlanner::new();
    let inv = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); inv.get_inplace_scratch_len()];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
    inv.process_with_scratch(&mut bins, &mut scratch);
    transpose(&bins, &mut tmp, n);
    inv.process_with_scratch(&mut tmp, &mut scratch);
    transpose(&tmp, &mut bins, n);
    ComplexField::from_values(*g, bins)
}
