// SPDX-License-Identifier: Apache-2.0

use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metagrammar_core::metagrammar::deserialize_matrix;
use metagrammar_core::sygus::parse_benchmark;

fn corpus(glob: &str) -> String {
    format!("{}/../../corpus/{glob}", env!("CARGO_MANIFEST_DIR"))
}

fn benchmark(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metagrammar")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn init_prints_a_full_matrix() {
    let o = run(&["init", "--corpus", &corpus("lia/*.sl")]);
    assert_eq!(o.status.code(), Some(0));
    let (s, m) = deserialize_matrix(&stdout(&o)).unwrap();
    assert_eq!(m.count_ones(), s.valid_count());
    assert_eq!(s.rows()[0].name, "Start");
}

#[test]
fn solve_with_the_full_grammar() {
    let b = benchmark("lia/max2.sl");
    let o = run(&["solve", p(&b), "--timeout", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("status: solved"), "{out}");
    assert!(out.contains("(define-fun max2 ((x Int) (y Int)) Int"), "{out}");
}

#[test]
fn emitted_benchmark_parses_back() {
    let o = run(&["emit", p(&benchmark("bv/lowest_bit.sl"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let b = parse_benchmark(&text).unwrap();
    assert!(b.synth_fun.grammar.is_some());
    assert_eq!(b.to_string(), text);
}

#[test]
fn evolve_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&[
        "evolve",
        "--corpus",
        &corpus("lia/*.sl"),
        "--train-count",
        "4",
        "--seed",
        "3",
        "--population",
        "4",
        "--parents",
        "2",
        "--generations",
        "2",
        "--timeout",
        "0.05",
        "--workers",
        "2",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["best.matrix", "best_ever.matrix", "history.csv", "results.csv", "report.csv", "report.txt"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 4);
    assert!(stdout(&o).contains("# Solved"));

    let eval_out = dir.path().join("eval");
    let o = run(&[
        "eval",
        "--matrix",
        p(&out.join("best.matrix")),
        "--corpus",
        &corpus("lia/*.sl"),
        "--timeout",
        "0.05",
        "--out",
        p(&eval_out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(eval_out.join("report.csv")).unwrap();
    assert!(report.starts_with("grammar,total,solved,avg_time_s,percent_solved\ndefault,12,"), "{report}");

    let o = run(&["solve", p(&benchmark("lia/diff.sl")), "--matrix", p(&out.join("best.matrix")), "--timeout", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("status: "));
}

#[test]
fn configuration_errors_exit_with_2() {
    let b = benchmark("lia/max2.sl");
    let lia = corpus("lia/*.sl");
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", p(&b), "--backend", "z3"],
        vec!["solve", p(&b), "--timeout", "0"],
        vec!["solve", p(&b), "--matrix", "/no/such.matrix"],
        vec!["solve", "/no/such.sl"],
        vec!["evolve", "--corpus", "/no/such/*.sl"],
        vec!["init", "--corpus", &lia, "--wiring", "diagonal"],
        vec!["frobnicate"],
    ];
    for args in &cases {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["evolve", "--corpus", &corpus("lia/*.sl"), "--parents", "1", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["evolve", "--corpus", &corpus("lia/*.sl"), "--train-count", "40", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infrastructure_errors_exit_with_3() {
    let o = run(&["solve", p(&benchmark("lia/max2.sl")), "--backend", "external:/no/such/solver"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn external_solver_answer_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("solver.sh");
    std::fs::write(&script, "#!/bin/sh\necho '(define-fun max2 ((a Int) (b Int)) Int (ite (<= a b) b a))'\n").unwrap();
    std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
    let backend = format!("external:{}", p(&script));
    let o = run(&["solve", p(&benchmark("lia/max2.sl")), "--backend", &backend, "--timeout", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("status: solved"), "{out}");
    assert!(out.contains("(ite (<= x y) y x)"), "{out}");
}
