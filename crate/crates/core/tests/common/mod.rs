#![allow(dead_code)]

use std::f64::consts::PI;

use lsscatter::grid::{ComplexField, GridSpec, Point};
use lsscatter::numint::adaptive;
use lsscatter::quadrature::KernelTable;
use lsscatter::specfun::hankel0;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const BETA: f64 = 0.156_101_596_108_443_8;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_field(g: GridSpec, rng: &mut StdRng) -> ComplexField {
    let values = (0..g.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexField::from_values(g, values).unwrap()
}

/// `sum_k w_{|j-k|} d_k` by brute force.
pub fn direct_toeplitz(kt: &KernelTable, d: &ComplexField) -> ComplexField {
    let n = d.grid().n() as i64;
    let mut out = ComplexField::zeros(*d.grid());
    for j1 in 0..n {
        for j2 in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k1 in 0..n {
                for k2 in 0..n {
                    s += kt.weight(j1 - k1, j2 - k2) * d.get(k1 as usize, k2 as usize);
                }
            }
            out.set(j1 as usize, j2 as usize, s);
        }
    }
    out
}

pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        let piv = a[c][c];
        for r in (c + 1)..n {
            let f = a[r][c] / piv;
            if f.norm() == 0.0 {
                continue;
            }
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
            let v = b[c];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in (r + 1)..n {
            s -= a[r][k] * x[k];
        }
        x[r] = s / a[r][r];
    }
    x
}

/// Dense matrix of a linear map, column by column.
pub fn assemble(n: usize, mut apply: impl FnMut(&[Complex64]) -> Vec<Complex64>) -> Vec<Vec<Complex64>> {
    let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        e[c] = Complex64::new(1.0, 0.0);
        let col = apply(&e);
        for r in 0..n {
            a[r][c] = col[r];
        }
        e[c] = Complex64::new(0.0, 0.0);
    }
    a
}

/// Compactly supported `C^inf` bump of radius `rho` centred at `c`.
pub fn bump(x: Point, c: Point, rho: f64) -> f64 {
    let t2 = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (rho * rho);
    if t2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t2)).exp()
    }
}

/// `int (i/4) H0(kappa |y|) bump(y) dy` in polar coordinates about the
/// origin, with the angular integral restricted to the bump's support.
pub fn bump_green_integral(kappa: f64, c: Point, rho: f64) -> Complex64 {
    let dist = c[0].hypot(c[1]);
    let theta_c = c[1].atan2(c[0]);
    let ring = |r: f64| -> f64 {
        let (lo, hi) = if r + dist <= rho {
            (0.0, 2.0 * PI)
        } else {
            let cosv = (r * r + dist * dist - rho * rho) / (2.0 * r * dist);
            if cosv >= 1.0 {
                return 0.0;
            }
            let phi = cosv.max(-1.0).acos();
            (theta_c - phi, theta_c + phi)
        };
        adaptive(|t: f64| bump([r * t.cos(), r * t.sin()], c, rho), lo, hi, 1e-15)
    };
    let r_lo = (dist - rho).max(0.0);
    let r_hi = dist + rho;
    let panels = 16;
    let dr = (r_hi - r_lo) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        total += adaptive(
            |r: f64| {
                if r <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(0.0, 0.25) * hankel0(kappa * r).unwrap() * (r * ring(r))
            },
            r_lo + p as f64 * dr,
            r_lo + (p + 1) as f64 * dr,
            1e-15,
        );
    }
    total
}
