use std::path::Path;
use std::process::{Command, Output};

use embedconst_cli::{RunConfig, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use embedconst_core::ResultTable;

fn embedconst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embedconst")).args(args).output().expect("binary runs")
}

fn read_table(dir: &Path, name: &str) -> ResultTable {
    let text = std::fs::read_to_string(dir.join(format!("{name}.csv"))).unwrap();
    ResultTable::from_csv(name, &text).unwrap()
}

fn num(t: &ResultTable, row: usize, col: &str) -> f64 {
    t.rows[row][t.column(col).unwrap()].as_f64().unwrap()
}

#[test]
fn constants_single_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = embedconst(&["constants", "--p", "2", "--q", "4", "--d", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_PASS), "{}", String::from_utf8_lossy(&out.stderr));
    let t = read_table(dir.path(), "constants");
    assert_eq!(t.rows.len(), 1);
    assert!((num(&t, 0, "s") - 2.0).abs() < 1e-12);
    assert!((num(&t, 0, "f") - 1.5946).abs() < 1e-4);
    assert!((num(&t, 0, "e_h_tilde") - 1.4366).abs() < 1e-4);
    let checks = read_table(dir.path(), "constants_checks");
    assert!(checks.failing_rows().is_empty());
}

#[test]
fn alpha_selects_the_same_pair_as_q() {
    let dir = tempfile::tempdir().unwrap();
    let out = embedconst(&["constants", "--p", "2", "--alpha", "1", "--d", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let t = read_table(dir.path(), "constants");
    assert!((num(&t, 0, "q") - 4.0).abs() < 1e-12);
}

#[test]
fn domain_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = embedconst(&["constants", "--p", "0.5", "--q", "4", "--d", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain error"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = embedconst(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_subcommand_and_bad_flag_exit_2() {
    assert_eq!(embedconst(&[]).status.code(), Some(EXIT_USAGE));
    assert_eq!(embedconst(&["constants", "--format", "xml"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(embedconst(&["constants", "--jobs", "0"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(embedconst(&["constants", "--q", "3"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn help_exits_0() {
    let out = embedconst(&["--help"]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["constants", "interp", "kernel", "embed", "mt", "verify-all"] {
        assert!(text.contains(sub), "help lists {sub}");
    }
}

#[test]
fn failing_check_exits_1_and_lists_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    std::fs::write(&cfg, "# radius tolerance far below the extrapolation error\ntol.series_radius = 1e-9\n").unwrap();
    let out = embedconst(&["mt", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_FAIL));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().any(|l| l.starts_with("FAIL mt_checks:") && l.contains("radius")), "{stderr}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = ["colour = blue\n", "tol.bogus = 1\n", "b = -1\n", "tol.golden = 0\n", "tau = 0.5\n", "no separator\n"];
    for (i, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.cfg"));
        std::fs::write(&cfg, text).unwrap();
        let out = embedconst(&["constants", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(EXIT_USAGE), "config {text:?}");
    }
    let missing = dir.path().join("absent.cfg");
    assert_eq!(embedconst(&["mt", "--config", missing.to_str().unwrap()]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    std::fs::write(&file, "x").unwrap();
    let out = embedconst(&["mt", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = embedconst(&["mt", "--format", "json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let text = std::fs::read_to_string(dir.path().join("mt_radius.json")).unwrap();
    assert!(text.starts_with('{'));
    assert!(text.contains("\"schema_version\""));
    assert!(text.contains("\"rows\""));
}

#[test]
fn kernel_single_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = embedconst(&["kernel", "--alpha", "1", "--d", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_PASS), "{}", String::from_utf8_lossy(&out.stderr));
    let t = read_table(dir.path(), "kernel_bounds");
    assert_eq!(t.rows.len(), 1);
    assert!(num(&t, 0, "local").is_finite());
    let bad = embedconst(&["kernel", "--alpha", "4", "--d", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}

#[test]
fn check_tables_share_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(embedconst(&["interp", "--d", "2", "--out", dir.path().to_str().unwrap()]).status.code(), Some(EXIT_PASS));
    let t = read_table(dir.path(), "interp_checks");
    assert_eq!(t.columns, embedconst_cli::CHECK_COLUMNS);
    // the grid-wide fit row has no single d
    assert!(t.rows.iter().all(|r| matches!(r[4].as_f64(), Some(2.0) | None)));
    assert!(t.rows.iter().filter(|r| r[4].as_f64().is_none()).count() == 1);
}

#[test]
fn config_file_overrides() {
    let cfg = RunConfig::from_config_text("D = 0\nb = 4\np_values = 2, 3\nd_values = 2\ntau = 3\ntol.golden = 1e-4\n").unwrap();
    assert_eq!(cfg.geometry.growth_rate, 0.0);
    assert_eq!(cfg.tau(), 3.0);
    assert_eq!(cfg.tol("golden"), 1e-4);
    let pairs = cfg.pairs().unwrap();
    assert!(pairs.iter().all(|p| p.d() == 2 && (p.p() == 2.0 || p.p() == 3.0)));
    assert!(RunConfig::from_config_text("d_values = 1.5\n").is_err());
}

#[test]
fn tau_defaults_to_tau_delta() {
    // D = 1, b = 1: (2/b)(2D + sqrt(b)/2)^2 = 12.5
    let cfg = RunConfig::default();
    assert!((cfg.tau() - 12.5).abs() < 1e-12);
}
