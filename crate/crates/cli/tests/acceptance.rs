//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use zerotemp::suites::run_criterion;

fn check(id: u8, budget: Duration) {
    let start = Instant::now();
    let r = run_criterion(id);
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    println!(
        "{} [{:.3}s, budget {}s]",
        zerotemp::suites::CriterionResult {
            pass: r.pass && in_time,
            ..r.clone()
        },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(r.pass, "criterion {id} failed: {}", r.measured);
    assert!(in_time, "criterion {id} took {elapsed:?}");
}

#[test]
fn criterion_01_closed_form_perron() {
    check(1, Duration::from_secs(1));
}

#[test]
fn criterion_02_theorem_a_rate() {
    check(2, Duration::from_secs(10));
}

#[test]
fn criterion_03_maxplus_oracle() {
    check(3, Duration::from_secs(10));
}

#[test]
fn criterion_04_cost_matrix_laws() {
    check(4, Duration::from_secs(10));
}

#[test]
fn criterion_05_walters_gamma() {
    check(5, Duration::from_secs(5));
}

#[test]
fn criterion_06_limit_measures() {
    check(6, Duration::from_secs(10));
}

#[test]
fn criterion_07_theorem_b_stability() {
    check(7, Duration::from_secs(10));
}

#[test]
fn criterion_08_appendix_selection_flip() {
    check(8, Duration::from_secs(2));
}

#[test]
fn criterion_09_calibration_residual() {
    check(9, Duration::from_secs(5));
}

fn run_once(config: &Path, out: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_zerotemp"))
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("ZEROTEMP_THREADS", "4")
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_10_determinism() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut count = 0;
    for name in ["lc1.json", "three_symbol.json", "walters_golden.json", "appendix.json"] {
        let a = run_once(&root.join(name), &dir.path().join(format!("{name}.a")));
        let b = run_once(&root.join(name), &dir.path().join(format!("{name}.b")));
        count += a.iter().filter(|(n, _)| n.ends_with(".csv")).count();
        identical &= a == b;
    }
    println!(
        "criterion 10 {:<28} {}  measured: {count} CSV files compared, identical {identical}  expected: byte-identical",
        "determinism",
        if identical { "PASS" } else { "FAIL" }
    );
    assert!(identical);
}
