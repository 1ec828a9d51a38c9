//! Uniform computational grid on `[-a, a]^2` and complex fields sampled on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];

/// `n x n` grid with nodes `x_j = (-a, -a) + h (j1, j2)`, `h = 2a/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    a: f64,
    n: usize,
    h: f64,
}

impl GridSpec {
    pub fn new(a: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width a = {a} must be positive")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} must be even and >= 2")));
        }
        Ok(GridSpec {
            a,
            n,
            h: 2.0 * a / n as f64,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of unknowns `N = n^2`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        -self.a + self.h * j as f64
    }

    #[inline]
    pub fn node(&self, j1: usize, j2: usize) -> Point {
        [self.coord(j1), self.coord(j2)]
    }

    /// Node of the flat (row-major) index `idx`.
    #[inline]
    pub fn node_flat(&self, idx: usize) -> Point {
        self.node(idx / self.n, idx % self.n)
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n || self.a != other.a {
            return Err(Error::GridMismatch {
                expected_n: self.n,
                expected_a: self.a,
                got_n: other.n,
                got_a: other.a,
            });
        }
        Ok(())
    }
}

/// Complex samples on a [`GridSpec`], row-major (`j1` outer, `j2` inner).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: GridSpec) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ComplexField { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Point) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node_flat(i))).collect();
        ComplexField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, j1: usize, j2: usize) -> Complex64 {
        self.values[j1 * self.grid.n + j2]
    }

    pub fn set(&mut self, j1: usize, j2: usize, v: Complex64) {
        let n = self.grid.n;
        self.values[j1 * n + j2] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Nodewise product.
    pub fn hadamard(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(ComplexField {
            grid: self.grid,
            values,
        })
    }

    /// Nodewise difference `self - other`.
    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ComplexField {
            grid: self.grid,
            values,
        })
    }

    /// Restriction to the nodes of a coarser nested grid: node `(j1, j2)`
    /// of `coarse` is node `(j1 r, j2 r)` of `self`, `r = n_self / n_coarse`.
    pub fn restrict_to(&self, coarse: &GridSpec) -> Result<ComplexField> {
        let nf = self.grid.n;
        let nc = coarse.n;
        if coarse.a != self.grid.a || nc == 0 || nf % nc != 0 {
            return Err(Error::GridMismatch {
                expected_n: nf,
                expected_a: self.grid.a,
                got_n: nc,
                got_a: coarse.a,
            });
        }
        let r = nf / nc;
        let mut values = Vec::with_capacity(coarse.len());
        for j1 in 0..nc {
            for j2 in 0..nc {
                values.push(self.values[j1 * r * nf + j2 * r]);
            }
        }
        Ok(ComplexField {
            grid: *coarse,
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes() {
        let g = GridSpec::new(1.1, 16).unwrap();
        assert_eq!(g.h() * g.n() as f64, 2.2);
        assert_eq!(g.node(0, 0), [-1.1, -1.1]);
        let x = g.node(8, 8);
        assert!(x[0].abs() < 1e-15 && x[1].abs() < 1e-15);
        assert!(GridSpec::new(1.0, 15).is_err());
        assert!(GridSpec::new(-1.0, 16).is_err());
    }

    #[test]
    fn restriction_picks_coincident_nodes() {
        let fine = GridSpec::new(1.0, 16).unwrap();
        let coarse = GridSpec::new(1.0, 4).unwrap();
        let f = ComplexField::from_fn(fine, |x| Complex64::new(x[0], x[1]));
        let r = f.restrict_to(&coarse).unwrap();
        for j1 in 0..4 {
            for j2 in 0..4 {
                let x = coarse.node(j1, j2);
                let v = r.get(j1, j2);
                assert!((v.re - x[0]).abs() < 1e-15 && (v.im - x[1]).abs() < 1e-15);
            }
        }
        assert!(f.restrict_to(&GridSpec::new(1.0, 6).unwrap()).is_err());
    }
}
