use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wordsolve")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn regression_verdicts() {
    for (name, want) in [("square", "sat"), ("powers", "unsat"), ("parikh-root", "unsat"), ("parikh-ab", "unsat"), ("five-vars", "unsat")] {
        let o = run(&[corpus(&format!("regression/{name}.smt2")).to_str().unwrap()]);
        assert!(o.status.success(), "{name}");
        assert_eq!(stdout(&o).lines().next(), Some(want), "{name}");
    }
}

#[test]
fn model_lines_follow_sat() {
    let o = run(&["--model", corpus("regression/square.smt2").to_str().unwrap()]);
    assert_eq!(stdout(&o), "sat\n(define-fun x () String \"b\")\n(define-fun y () String \"b\")\n");
}

#[test]
fn stats_name_unknown_reason() {
    let o = run(&["--stats", "--max-depth", "1", "--strategy", "bfs", "--no-dedup", corpus("track01/000.smt2").to_str().unwrap()]);
    let out = stdout(&o);
    assert!(o.status.success());
    for key in ["nodes-expanded", "rules-generic", "powers-introduced", "parikh-refutations", "wall-ms"] {
        assert!(out.contains(key), "{key} missing from {out}");
    }
    if out.starts_with("unknown") {
        assert!(out.contains("unknown-reason"));
    }
}

#[test]
fn malformed_and_unsupported_exit_one() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.smt2");
    std::fs::write(&bad, "(declare-const x String)\n(assert (= x \"a\")").unwrap();
    let o = run(&[bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"));
    std::fs::write(&bad, "(declare-const x String)\n(assert (str.contains x \"a\"))\n").unwrap();
    let o = run(&[bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("str.contains"));
    let o = run(&[d.path().join("missing.smt2").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_problem_is_sat() {
    let d = tempfile::tempdir().unwrap();
    let f = d.path().join("e.smt2");
    std::fs::write(&f, "(set-logic QF_S)\n(check-sat)\n").unwrap();
    let o = run(&["--model", f.to_str().unwrap()]);
    assert_eq!(stdout(&o), "sat\n");
}

#[test]
fn same_seed_same_output() {
    let d = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for i in 0..2 {
        let dot = d.path().join(format!("{i}.dot"));
        let o = run(&["--stats", "--seed", "5", "--dump-dot", dot.to_str().unwrap(), corpus("regression/five-vars.smt2").to_str().unwrap()]);
        let text: Vec<String> = stdout(&o).lines().filter(|l| !l.starts_with("; wall-ms")).map(String::from).collect();
        seen.push((text, std::fs::read_to_string(&dot).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn bench_regression_directory() {
    let d = tempfile::tempdir().unwrap();
    let csv = d.path().join("out.csv");
    let o = run(&["bench", corpus("regression").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let rows: Vec<String> = std::fs::read_to_string(&csv).unwrap().lines().skip(1).map(String::from).collect();
    let mut verdicts: Vec<&str> = rows.iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    verdicts.sort();
    assert_eq!(verdicts, ["sat", "unsat", "unsat", "unsat", "unsat"]);
    assert!(stdout(&o).contains("solved"));
}

#[test]
fn bench_empty_directory() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["bench", d.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "file,verdict,time_ms,nodes\n");
}

#[test]
fn oracle_subcommand() {
    let o = run(&["oracle", "--max-len", "3", corpus("regression/parikh-root.smt2").to_str().unwrap()]);
    assert_eq!(stdout(&o), "unsat-within-bounds\n");
    let o = run(&["oracle", "--max-len", "2", corpus("regression/square.smt2").to_str().unwrap()]);
    assert!(stdout(&o).starts_with("sat\n"));
}
