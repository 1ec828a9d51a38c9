mod common;

use std::f64::consts::PI;

use lsscatter::fastconv::eval_smoothed_indicator;
use lsscatter::geometry::{indicator_coeffs, IndicatorCoeffs, Shape, DEFAULT_COEFF_TOL};
use lsscatter::grid::GridSpec;
use lsscatter::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use common::rng;

fn direct_sum(ic: &IndicatorCoeffs, x: [f64; 2]) -> Complex64 {
    let f = ic.f() as i64;
    let a = ic.a();
    let mut s = Complex64::new(0.0, 0.0);
    for j in -f..=f {
        for k in -f..=f {
            let t = PI * (j as f64 * x[0] + k as f64 * x[1]) / a;
            s += ic.get(j, k) * Complex64::new(t.cos(), t.sin());
        }
    }
    s
}

#[test]
fn smoothed_indicator_matches_direct_sum_at_random_nodes() {
    let mut r = rng(7);
    let (n, f, a) = (32usize, 16usize, 1.1);
    let side = 2 * f + 1;
    let coeffs = (0..side * side)
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    let ic = IndicatorCoeffs::new(f, a, coeffs).unwrap();
    let g = GridSpec::new(a, n).unwrap();
    let fast = eval_smoothed_indicator(&ic, &g).unwrap();
    let scale: f64 = ic.values().iter().map(|c| c.norm()).sum();
    for _ in 0..50 {
        let (j1, j2) = (r.gen_range(0..n), r.gen_range(0..n));
        let exact = direct_sum(&ic, g.node(j1, j2));
        let err = (fast.get(j1, j2) - exact).norm();
        assert!(err <= 1e-12 * scale.max(1.0), "node ({j1}, {j2}): {err:e}");
    }
}

#[test]
fn disc_indicator_is_real_and_close_to_sharp_away_from_boundary() {
    let a = 1.1;
    let g = GridSpec::new(a, 128).unwrap();
    let disc = Shape::disc([0.0, 0.0], 1.0);
    let ic = indicator_coeffs(&disc, 64, a, DEFAULT_COEFF_TOL).unwrap();
    let chi = eval_smoothed_indicator(&ic, &g).unwrap();
    for i in 0..g.len() {
        let x = g.node_flat(i);
        let v = chi.values()[i];
        assert!(v.im.abs() < 1e-12);
        let r = x[0].hypot(x[1]);
        if (r - 1.0).abs() > 0.25 {
            let sharp = if r < 1.0 { 1.0 } else { 0.0 };
            assert!((v.re - sharp).abs() < 0.05, "x = {x:?}: {}", v.re);
        }
    }
}

#[test]
fn mean_coefficient_is_area_fraction() {
    let a = 1.5;
    for shape in [
        Shape::disc([0.1, -0.2], 0.5),
        Shape::rect([0.0, 0.1], [0.4, 0.3]),
        Shape::cusp_star(),
        Shape::polygon(&[[-0.5, -0.5], [0.6, -0.4], [0.1, 0.7]]),
    ] {
        let ic = indicator_coeffs(&shape, 4, a, DEFAULT_COEFF_TOL).unwrap();
        let area = shape.area().unwrap();
        assert!((ic.get(0, 0).re - area / (4.0 * a * a)).abs() < 1e-10, "{shape:?}");
        // real indicator: c_{-j,-k} = conj(c_{j,k})
        for j in -4i64..=4 {
            for k in -4i64..=4 {
                assert!((ic.get(-j, -k) - ic.get(j, k).conj()).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn too_many_modes_is_rejected() {
    let ic = IndicatorCoeffs::zeros(9, 1.0);
    let g = GridSpec::new(1.0, 16).unwrap();
    assert!(matches!(
        eval_smoothed_indicator(&ic, &g),
        Err(Error::FTooLarge { f: 9, half: 8 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn translated_disc_coefficients_pick_up_a_phase(
        cx in -0.3f64..0.3, cy in -0.3f64..0.3, j in -6i64..=6, k in -6i64..=6,
    ) {
        let a = 1.0;
        let base = indicator_coeffs(&Shape::disc([0.0, 0.0], 0.4), 6, a, DEFAULT_COEFF_TOL).unwrap();
        let moved = indicator_coeffs(&Shape::disc([cx, cy], 0.4), 6, a, DEFAULT_COEFF_TOL).unwrap();
        let t = -PI * (j as f64 * cx + k as f64 * cy) / a;
        let expect = base.get(j, k) * Complex64::new(t.cos(), t.sin());
        prop_assert!((moved.get(j, k) - expect).norm() < 1e-12);
    }
}
