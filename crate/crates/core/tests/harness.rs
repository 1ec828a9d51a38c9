mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use lsscatter::harness::cli::{run, EXIT_CONFIG, EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK};
use lsscatter::harness::io::{read_convergence_csv, read_field_dump, ConvergenceRow};
use lsscatter::harness::{presets, CaseConfig};
use lsscatter::solver::{sample_incident, IncidentField};
use proptest::prelude::*;

use common::BETA;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Small example-1 style case written to `dir/case.json`.
fn small_case(dir: &Path, contrast: f64) -> PathBuf {
    let mut cfg = presets::example1();
    cfg.name = "small".into();
    cfg.grids = vec![16, 32];
    cfg.n = Some(32);
    cfg.beta = Some(BETA);
    cfg.contrast = lsscatter::harness::config::ContrastConfig::Constant { value: contrast };
    let path = dir.join("case.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path
}

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("lsscatter").chain(args.iter().copied()))
}

#[test]
fn shipped_configs_match_presets() {
    let dir = configs_dir();
    for p in [
        presets::example1(),
        presets::corner(),
        presets::cusp(),
        presets::cusp_figure(),
        presets::table2_qualitative(100.0 * std::f64::consts::PI),
    ] {
        let path = dir.join(format!("{}.json", p.name));
        let loaded = CaseConfig::load(&path, &[]).unwrap();
        assert_eq!(loaded, p, "{}", path.display());
    }
}

#[test]
fn zero_contrast_study_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_case(tmp.path(), 0.0);
    let out = tmp.path().join("out");
    let code = cli(&["converge", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let rows = read_convergence_csv(&out.join("small_fspt_convergence.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![16, 32]);
    for r in rows {
        assert!(r.eps2 <= 1e-14 && r.eps_inf <= 1e-14, "{r:?}");
        assert_eq!(r.iterations, 1);
    }
}

#[test]
fn solve_writes_readable_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_case(tmp.path(), -0.5);
    let out = tmp.path().join("out");
    let code = cli(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let (total, kappa) = read_field_dump(&out.join("small_fspt_n32_total.lsf")).unwrap();
    let (scat, _) = read_field_dump(&out.join("small_fspt_n32_scattered.lsf")).unwrap();
    assert_eq!(kappa, 10.0);
    let inc = sample_incident(&IncidentField::RadialBessel, kappa, total.grid());
    for ((t, s), i) in total.values().iter().zip(scat.values()).zip(inc.values()) {
        assert!((t - s - i).norm() < 1e-14);
    }
    let csv = std::fs::read_to_string(out.join("small_fspt_n32_total.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 32 * 32);
}

#[test]
fn timing_writes_one_row_per_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_case(tmp.path(), -0.5);
    let out = tmp.path().join("out");
    let code = cli(&[
        "timing",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--mode",
        "plain",
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(out.join("small_plain_timing.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,N,t_apply,t_solve,iterations");
    assert_eq!(lines.len(), 3);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_case(tmp.path(), -0.5);
    let cfg = cfg.to_str().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();

    assert_eq!(cli(&[]), EXIT_CONFIG);
    assert_eq!(cli(&["solve"]), EXIT_CONFIG);
    assert_eq!(
        cli(&["solve", "--config", cfg, "--out", out, "--override", "kappa=-1"]),
        EXIT_CONFIG
    );
    assert_eq!(
        cli(&["solve", "--config", cfg, "--out", out, "--override", "bogus=1"]),
        EXIT_CONFIG
    );
    assert_eq!(
        cli(&["solve", "--config", cfg, "--out", out, "--override", "n=31"]),
        EXIT_CONFIG
    );
    assert_eq!(
        cli(&[
            "solve", "--config", cfg, "--out", out,
            "--override", "solver.maxiter=2", "--override", "solver.restart=1",
        ]),
        EXIT_NOT_CONVERGED
    );
    let missing = tmp.path().join("missing.json");
    assert_eq!(cli(&["solve", "--config", missing.to_str().unwrap()]), EXIT_IO);

    let garbage = tmp.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(cli(&["solve", "--config", garbage.to_str().unwrap()]), EXIT_CONFIG);
}

#[test]
fn binary_reports_exit_code() {
    let status = Command::new(env!("CARGO_BIN_EXE_lsscatter"))
        .args(["solve", "--config", "/nonexistent/case.json"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_IO));
    let status = Command::new(env!("CARGO_BIN_EXE_lsscatter")).arg("--help").status().unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
}

proptest! {
    #[test]
    fn convergence_rows_roundtrip(
        n in 1usize..5000, f in 0usize..2500,
        e2 in 1e-15f64..1.0, ei in 1e-15f64..1.0,
        noc in proptest::option::of(-5.0f64..5.0),
        iters in 0usize..3000, secs in 0.0f64..1e4,
    ) {
        let row = ConvergenceRow { n, f, eps2: e2, noc2: noc, eps_inf: ei, noc_inf: noc, iterations: iters, seconds: secs };
        let back = ConvergenceRow::from_csv(&row.to_csv()).unwrap();
        prop_assert_eq!(back.n, n);
        prop_assert_eq!(back.f, f);
        prop_assert_eq!(back.iterations, iters);
        prop_assert!((back.eps2 - e2).abs() <= 1e-5 * e2);
        prop_assert!((back.eps_inf - ei).abs() <= 1e-5 * ei);
        prop_assert_eq!(back.noc2.is_some(), noc.is_some());
        // round-tripping the printed line is exact
        prop_assert_eq!(back.to_csv(), row.to_csv());
    }
}
