use std::path::Path;
use std::process::{Command, Output};

use distill_lab::distill::ReproBundle;
use distill_lab::optimize::SearchReport;

const BIN: &str = env!("CARGO_BIN_EXE_distill-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("DISTILL_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn bound_table_has_header_and_values() {
    let o = run(&["bound", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    let header: serde_json::Value = serde_json::from_str(first.strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(header["subcommand"], "bound");
    assert_eq!(header["seed"], 0xD157);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), -0.25);
    let b3: f64 = rows[2][1].parse().unwrap();
    assert!((b3 + 0.1652).abs() < 1e-4);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() < 1e-12));
}

#[test]
fn bound_rejects_out_of_range() {
    assert_eq!(code(&run(&["bound", "--n", "65"])), 2);
    assert_eq!(code(&run(&["bound", "--n", "x"])), 2);
}

#[test]
fn minimize_violation_writes_bundle_and_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let bundles = dir.path().join("bundles");
    let o = run(&[
        "minimize",
        "--d",
        "2",
        "--n",
        "2",
        "--beta",
        "-0.6",
        "--out",
        out.to_str().unwrap(),
        "--bundle-dir",
        bundles.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["header"]["subcommand"], "minimize");
    assert_eq!(v["report"]["wall_time_s"], 0.0);
    let report: SearchReport = serde_json::from_value(v["report"].clone()).unwrap();
    assert!(report.best_value <= -0.08 + 1e-9);
    let files: Vec<_> = std::fs::read_dir(&bundles).unwrap().collect();
    assert_eq!(files.len(), 1);
    let b = ReproBundle::read(&files[0].as_ref().unwrap().path()).unwrap();
    assert_eq!(b.value, report.best_value);
    assert_eq!(b.kind, "q-violation");

    let again = run(&["verify", "--suite", "report", "--in", out.to_str().unwrap()]);
    assert_eq!(code(&again), 0, "{}", stdout(&again));
}

#[test]
fn minimize_flat_objective_exits_zero() {
    let o = run(&["minimize", "--d", "2", "--n", "2", "--beta", "0", "--restarts", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["report"]["best_value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn minimize_cap_is_a_usage_error() {
    assert_eq!(code(&run(&["minimize", "--d", "3", "--n", "6", "--beta", "-0.5"])), 2);
}

#[test]
fn outputs_are_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["minimize", "--d", "2", "--n", "2", "--beta", "-0.3", "--restarts", "6"];
    let mut args_a = base.to_vec();
    args_a.extend(["--threads", "1", "--out", a.to_str().unwrap()]);
    let mut args_b = base.to_vec();
    args_b.extend(["--threads", "4", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&run(&args_a)), 0);
    assert_eq!(code(&run(&args_b)), 0);
    let (ja, jb) = (read_json(&a), read_json(&b));
    assert_eq!(ja["report"], jb["report"]);

    let h1 = run(&["hessian", "--d", "2", "--samples", "40", "--seed", "7"]);
    let h2 = run(&["hessian", "--d", "2", "--samples", "40", "--seed", "7"]);
    assert_eq!(h1.stdout, h2.stdout);
}

#[test]
fn thread_env_overrides_and_is_validated() {
    let o = Command::new(BIN)
        .args(["bound", "--n", "2", "--threads", "2"])
        .env("DISTILL_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(BIN)
        .args(["bound", "--n", "2"])
        .env("DISTILL_LAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn sweep_reports_sorted_rows_and_bracket() {
    let o = run(&["sweep", "--d", "3", "--n", "1", "--beta-grid=-0.4,-0.6,-0.5", "--restarts", "10"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows = csv_rows(&text);
    let betas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(betas, vec![-0.6, -0.5, -0.4]);
    let vals: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((vals[0] + 0.2).abs() < 1e-8);
    assert!(vals[1].abs() < 1e-8);
    assert!(vals[2] >= -1e-8);
    assert!(text.contains("# sign_change"));
    assert_eq!(code(&run(&["sweep", "--d", "3", "--n", "1", "--beta-grid", ""])), 2);
}

#[test]
fn hessian_single_sample() {
    let o = run(&["hessian", "--d", "2", "--samples", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&stdout(&o)).len(), 1);
    assert!(stdout(&o).contains("# summary min_eigenvalue="));
    assert_eq!(code(&run(&["hessian", "--d", "5"])), 2);
}

#[test]
fn iterate_certifies_and_refutes() {
    let o = run(&["iterate", "--d", "3", "--k", "1", "--beta", "-0.25"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["path"], "iterate");
    assert!(v["certification"]["min_value"].as_f64().unwrap() >= -1e-9);

    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "iterate",
        "--d",
        "2",
        "--k",
        "0",
        "--beta",
        "-0.6",
        "--bundle-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn demo_and_verify_suites() {
    let o = run(&["demo-nonconvexity", "--d", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["demo"]["cosine_to_pattern"].as_f64().unwrap() - 1.0).abs() < 1e-8);

    let o = run(&["verify", "--suite", "equivalence", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().any(|l| l.starts_with("PASS equivalence/")));
    assert_eq!(code(&run(&["verify", "--suite", "bogus"])), 2);
    assert_eq!(code(&run(&["verify", "--suite", "report"])), 2);
}

#[test]
fn rank2_sampling_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r2.csv");
    let o = run(&["rank2", "--d", "2", "--samples", "50", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv_rows(&text).len(), 50);
}
