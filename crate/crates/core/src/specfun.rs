//! Real-argument Bessel functions of order zero and one and the Hankel
//! function `H0 = J0 + i Y0`.
//!
//! Two branches:
//!
//! * `x <= SERIES_LIMIT`: ascending power series (with the logarithmic
//!   terms for `Y0`, `Y1`) summed in double-double arithmetic. The series
//!   alternate with terms as large as ~1e7 near the switch point, so plain
//!   `f64` summation would lose six or more digits.
//! * `x > SERIES_LIMIT`: Hankel's asymptotic amplitude/phase expansion,
//!   summed until the terms stop decreasing. At the switch point the
//!   smallest term is below 1e-17.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Switch point between the series and asymptotic branches.
pub const SERIES_LIMIT: f64 = 20.0;

pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EULER_GAMMA_LO: f64 = -4.942_915_152_430_645e-18;

/// Double-double number `hi + lo`, `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    fn quick(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let r = Dd::quick(s.hi, s.lo + t.hi);
        Dd::quick(r.hi, r.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        Dd::quick(p, err + (self.hi * o.lo + self.lo * o.hi))
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = self.hi * b;
        let err = self.hi.mul_add(b, -p);
        Dd::quick(p, err + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self.add(Dd::new(q1 * b).add(Dd::new(q1.mul_add(b, -(q1 * b)))).neg());
        let q2 = r.hi / b;
        Dd::quick(q1, q2)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Ascending series for J0, J1 and the non-logarithmic parts of Y0, Y1.
///
/// Returns `(J0, J1, S0, S1)` with
/// `Y0 = (2/pi) [ (ln(x/2) + gamma) J0 + S0 ]` and
/// `Y1 = (2/pi) [ (ln(x/2) + gamma) J1 - 1/x + S1 ]`.
fn ascending(x: f64) -> (Dd, Dd, Dd, Dd) {
    let half = Dd::new(x).mul_f64(0.5);
    let q = half.mul(half).neg(); // -(x/2)^2

    // t0_m = (-(x/2)^2)^m / (m!)^2, t1_m = (x/2) (-(x/2)^2)^m / (m! (m+1)!)
    let mut t0 = Dd::new(1.0);
    let mut t1 = half;
    let mut j0 = t0;
    let mut j1 = t1;
    let mut s0 = Dd::ZERO;
    // S1 = -(1/2) sum_m (-1)^m (H_m + H_{m+1}) |t1_m|; H_0 = 0, H_1 = 1.
    let mut s1 = t1.mul_f64(-0.5);
    let mut harm = Dd::ZERO;
    let mut m = 0.0_f64;
    loop {
        m += 1.0;
        t0 = t0.mul(q).div_f64(m * m);
        t1 = t1.mul(q).div_f64(m * (m + 1.0));
        harm = harm.add(Dd::new(1.0).div_f64(m));
        let h_next = harm.add(Dd::new(1.0).div_f64(m + 1.0));
        j0 = j0.add(t0);
        j1 = j1.add(t1);
        // (-1)^{m+1} H_m (x/2)^{2m}/(m!)^2 = -H_m t0_m
        s0 = s0.add(t0.mul(harm).neg());
        s1 = s1.add(t1.mul(harm.add(h_next)).mul_f64(-0.5));
        let mag = t0.hi.abs().max(t1.hi.abs()) * (1.0 + harm.hi + h_next.hi);
        if mag < 1e-34 * (1.0 + j0.hi.abs()) || m > 200.0 {
            break;
        }
    }
    (j0, j1, s0, s1)
}

/// Hankel asymptotic expansion: returns `(P, Q)` for order `nu`.
fn asymptotic_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0_f64;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    let mut k = 1.0_f64;
    loop {
        let odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * x);
        let mag = term.abs();
        if mag > last || mag < 1e-18 * p.abs() {
            break;
        }
        last = mag;
        // k odd -> Q, k even -> P; signs alternate every two terms.
        let ki = k as u64;
        let sign = if (ki / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if ki % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    (p, q)
}

/// `(J0, Y0, J1, Y1)` from the asymptotic branch.
fn asymptotic_all(x: f64) -> (f64, f64, f64, f64) {
    let amp = (2.0 / (std::f64::consts::PI * x)).sqrt();
    let (s, c) = x.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // w0 = x - pi/4, w1 = x - 3pi/4
    let (sw0, cw0) = ((s - c) * r, (c + s) * r);
    let (sw1, cw1) = (-(s + c) * r, (s - c) * r);
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(1.0, x);
    (
        amp * (p0 * cw0 - q0 * sw0),
        amp * (p0 * sw0 + q0 * cw0),
        amp * (p1 * cw1 - q1 * sw1),
        amp * (p1 * sw1 + q1 * cw1),
    )
}

fn log_factor(x: f64) -> f64 {
    (x * 0.5).ln() + EULER_GAMMA + EULER_GAMMA_LO
}

fn j0_unchecked(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        ascending(x).0.to_f64()
    } else {
        asymptotic_all(x).0
    }
}

fn j1_unchecked(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        ascending(x).1.to_f64()
    } else {
        asymptotic_all(x).2
    }
}

/// `(J0, Y0)` for `x > 0`, sharing one series pass.
pub(crate) fn j0_y0(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        let (j0, _, s0, _) = ascending(x);
        let y0 = std::f64::consts::FRAC_2_PI * (log_factor(x) * j0.to_f64() + s0.to_f64());
        (j0.to_f64(), y0)
    } else {
        let (j0, y0, _, _) = asymptotic_all(x);
        (j0, y0)
    }
}

/// `(J0, Y0, J1, Y1)` for `x > 0`.
pub(crate) fn bessel_all(x: f64) -> (f64, f64, f64, f64) {
    if x <= SERIES_LIMIT {
        let (j0, j1, s0, s1) = ascending(x);
        let l = log_factor(x);
        let (j0, j1) = (j0.to_f64(), j1.to_f64());
        let y0 = std::f64::consts::FRAC_2_PI * (l * j0 + s0.to_f64());
        let y1 = std::f64::consts::FRAC_2_PI * (l * j1 - 1.0 / x + s1.to_f64());
        (j0, y0, j1, y1)
    } else {
        asymptotic_all(x)
    }
}

/// Series-branch values `(J0, Y0, J1, Y1)` regardless of `x`.
#[doc(hidden)]
pub fn series_branch(x: f64) -> (f64, f64, f64, f64) {
    let (j0, j1, s0, s1) = ascending(x);
    let l = log_factor(x);
    let (j0, j1) = (j0.to_f64(), j1.to_f64());
    (
        j0,
        std::f64::consts::FRAC_2_PI * (l * j0 + s0.to_f64()),
        j1,
        std::f64::consts::FRAC_2_PI * (l * j1 - 1.0 / x + s1.to_f64()),
    )
}

/// Asymptotic-branch values `(J0, Y0, J1, Y1)` regardless of `x`.
#[doc(hidden)]
pub fn asymptotic_branch(x: f64) -> (f64, f64, f64, f64) {
    asymptotic_all(x)
}

fn check_nonneg(func: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 || x.is_infinite() {
        return Err(Error::Domain { func, x });
    }
    Ok(())
}

fn check_pos(func: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return Err(Error::Domain { func, x });
    }
    Ok(())
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    check_nonneg("bessel_j0", x)?;
    Ok(j0_unchecked(x))
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> Result<f64> {
    check_nonneg("bessel_j1", x)?;
    Ok(j1_unchecked(x))
}

/// Bessel function of the second kind, order zero.
pub fn bessel_y0(x: f64) -> Result<f64> {
    check_pos("bessel_y0", x)?;
    Ok(j0_y0(x).1)
}

/// Bessel function of the second kind, order one.
pub fn bessel_y1(x: f64) -> Result<f64> {
    check_pos("bessel_y1", x)?;
    Ok(bessel_all(x).3)
}

/// Hankel function of the first kind, order zero: `J0(x) + i Y0(x)`.
pub fn hankel0(x: f64) -> Result<Complex64> {
    check_pos("hankel0", x)?;
    let (j, y) = j0_y0(x);
    Ok(Complex64::new(j, y))
}

/// Hankel function of the first kind, order one: `J1(x) + i Y1(x)`.
pub fn hankel1(x: f64) -> Result<Complex64> {
    check_pos("hankel1", x)?;
    let (_, _, j, y) = bessel_all(x);
    Ok(Complex64::new(j, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain f64 power series, accurate for small x only.
    fn j0_series_oracle(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..30 {
            let m = m as f64;
            term *= -(x * x / 4.0) / (m * m);
            sum += term;
        }
        sum
    }

    fn j1_series_oracle(x: f64) -> f64 {
        let mut term = x / 2.0;
        let mut sum = term;
        for m in 1..30 {
            let m = m as f64;
            term *= -(x * x / 4.0) / (m * (m + 1.0));
            sum += term;
        }
        sum
    }

    #[test]
    fn j0_values() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
        assert!((bessel_j0(1.0).unwrap() - 0.7651976865579666).abs() < 1e-15);
        assert!((bessel_j0(1.0).unwrap() - j0_series_oracle(1.0)).abs() < 1e-15);
        // First zero by bisection on the series oracle.
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if j0_series_oracle(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 2.404825557695773).abs() < 1e-14);
        assert!(bessel_j0(2.404825557695773).unwrap().abs() <= 1e-13);
    }

    #[test]
    fn j1_values() {
        assert_eq!(bessel_j1(0.0).unwrap(), 0.0);
        assert!((bessel_j1(1.0).unwrap() - 0.4400505857449335).abs() < 1e-15);
        assert!((bessel_j1(1.0).unwrap() - j1_series_oracle(1.0)).abs() < 1e-15);
        let x = 1e-6;
        assert!((bessel_j1(x).unwrap() / x - 0.5).abs() < 1e-10);
    }

    #[test]
    fn y0_values() {
        assert!((bessel_y0(1.0).unwrap() - 0.08825696421567696).abs() < 1e-15);
        let x: f64 = 1e-8;
        let law = std::f64::consts::FRAC_2_PI * ((x / 2.0).ln() + EULER_GAMMA) * bessel_j0(x).unwrap();
        assert!((bessel_y0(x).unwrap() - law).abs() < 1e-12);
    }

    #[test]
    fn reference_values_across_branches() {
        // 30-digit reference values.
        let cases = [
            (0.5, 0.9384698072408129, -0.44451873350670656, 0.24226845767487389, -1.4714723926702431),
            (5.0, -0.1775967713143383, -0.30851762524903378, -0.32757913759146522, 0.14786314339122684),
            (8.0, 0.17165080713755391, 0.22352148938756622, 0.23463634685391462, -0.15806046173124749),
            (15.0, -0.014224472826780773, 0.20546429603891826, 0.20510403861352276, 0.021073628036873512),
            (25.0, 0.096266783275958116, -0.12724943226800614, -0.1253502495802899, -0.09882996478323741),
            (60.0, -0.09147180408906187, 0.047358952209449399, 0.046598383758166318, 0.091869609369866895),
        ];
        for &(x, j0, y0, j1, y1) in &cases {
            assert!((bessel_j0(x).unwrap() - j0).abs() < 1e-14, "J0({x})");
            assert!((bessel_y0(x).unwrap() - y0).abs() < 1e-14, "Y0({x})");
            assert!((bessel_j1(x).unwrap() - j1).abs() < 1e-14, "J1({x})");
            assert!((bessel_y1(x).unwrap() - y1).abs() < 1e-14, "Y1({x})");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j0(-1.0).is_err());
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j1(-0.5).is_err());
        assert!(bessel_y0(0.0).is_err());
        assert!(bessel_y1(-2.0).is_err());
        assert!(hankel0(0.0).is_err());
    }

    #[test]
    fn wronskian() {
        for &x in &[0.5, 2.0, 10.0] {
            let w = bessel_j1(x).unwrap() * bessel_y0(x).unwrap()
                - bessel_j0(x).unwrap() * bessel_y1(x).unwrap();
            assert!((w - 2.0 / (std::f64::consts::PI * x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn hankel_values() {
        let h = hankel0(1.0).unwrap();
        assert!((h.re - 0.7651976865579666).abs() < 1e-15);
        assert!((h.im - 0.08825696421567696).abs() < 1e-15);
        assert!(hankel0(2.404825557695773).unwrap().re.abs() <= 1e-13);
        let mut prev = f64::INFINITY;
        for i in 0..=190 {
            let x = 1.0 + 0.1 * i as f64;
            let m = hankel0(x).unwrap().norm();
            assert!(m < prev, "x={x}");
            prev = m;
        }
    }

    #[test]
    fn derivative_recurrence() {
        let step = 1e-5;
        for &x in &[0.5, 1.0, 3.0, 7.0, 15.0] {
            let d = (bessel_j0(x + step).unwrap() - bessel_j0(x - step).unwrap()) / (2.0 * step);
            assert!((bessel_j1(x).unwrap() + d).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn branch_seam() {
        let x = SERIES_LIMIT;
        let s = series_branch(x);
        let a = asymptotic_branch(x);
        assert!((s.0 - a.0).abs() < 1e-13);
        assert!((s.1 - a.1).abs() < 1e-13);
        assert!((s.2 - a.2).abs() < 1e-13);
        assert!((s.3 - a.3).abs() < 1e-13);
    }
}
