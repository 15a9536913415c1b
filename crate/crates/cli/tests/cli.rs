use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mgrit-advect"));
    c.env_remove("MGRIT_ADVECT_SEED");
    c
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        bin()
            .args([
                "run", "--n-x", "64", "--n-t", "256", "--name", "small", "--out",
            ])
            .arg(dir.path()),
    );
    let rep = json(&dir.path().join("small.json"));
    assert_eq!(rep["status"], "converged");
    let iters = rep["iterations"].as_u64().unwrap() as usize;
    assert_eq!(rep["history"].as_array().unwrap().len(), iters + 1);
    assert_eq!(rep["config"]["seed"], 0);
    assert_eq!(rep["config"]["gmres"], "fixed");
    let csv = std::fs::read_to_string(dir.path().join("small.csv")).unwrap();
    assert!(csv.starts_with("iteration,residual,relative\n"));
    assert_eq!(csv.lines().count(), iters + 2);
}

#[test]
fn default_run_iteration_count() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        bin()
            .args(["run", "--speed", "C1", "--p", "1", "--m", "4", "--out"])
            .arg(dir.path()),
    );
    let iters = json(&dir.path().join("run.json"))["iterations"]
        .as_i64()
        .unwrap();
    assert!((iters - 14).abs() <= 2, "iterations {iters}");
}

#[test]
fn ideal_run_single_iteration() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        bin()
            .args([
                "run",
                "--n-x",
                "64",
                "--n-t",
                "256",
                "--operator",
                "ideal",
                "--out",
            ])
            .arg(dir.path()),
    );
    assert_eq!(json(&dir.path().join("run.json"))["iterations"], 1);
}

#[test]
fn divergence_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(
        bin()
            .args([
                "run",
                "--n-x",
                "64",
                "--n-t",
                "256",
                "--operator",
                "forward_euler",
                "--m",
                "16",
                "--p",
                "5",
                "--dt",
                "0.0390625",
                "--out",
            ])
            .arg(dir.path()),
    );
    let rep = json(&dir.path().join("run.json"));
    let status = rep["status"].as_str().unwrap().to_string();
    assert!(["diverged", "converged", "max_iters"].contains(&status.as_str()));
    assert!(String::from_utf8_lossy(&out.stdout).contains(&format!("status={status}")));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["run", "--bogus"],
        vec!["run", "--p", "2"],
        vec!["run", "--speed", "C9"],
        vec!["run", "--dimension", "2", "--speed", "C1"],
        vec!["run", "--n-t", "1000", "--m", "16"],
        vec!["table", "nope"],
        vec!["table", "two_level_1d", "--size-cap", "big"],
        vec!["verify", "nope"],
        vec!["lfa", "--coarse-kind", "weird"],
        vec![],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"n_x": 32, "n_t": 128, "p": 3, "m": [8], "seed": 5}"#,
    )
    .unwrap();
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .args(["--p", "1", "--out"])
            .arg(dir.path()),
    );
    let rep = json(&dir.path().join("run.json"));
    assert_eq!(rep["config"]["p"], 1);
    assert_eq!(rep["config"]["m"][0], 8);
    assert_eq!(rep["config"]["seed"], 5);
    std::fs::write(&cfg, r#"{"unknown": 1}"#).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        bin()
            .env("MGRIT_ADVECT_SEED", "42")
            .args(["run", "--n-x", "32", "--n-t", "64", "--out"])
            .arg(dir.path()),
    );
    assert_eq!(json(&dir.path().join("run.json"))["config"]["seed"], 42);
    let out = bin()
        .env("MGRIT_ADVECT_SEED", "x")
        .args(["run", "--n-x", "32", "--n-t", "64", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_cap_below_smallest_mesh_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(
        bin()
            .args(["table", "two_level_1d", "--size-cap", "16x16", "--out"])
            .arg(dir.path()),
    );
    let csv = std::fs::read_to_string(dir.path().join("two_level_1d.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv
        .starts_with("table,dimension,speed,p,r,m,n_x,n_t,operator,departures,iterations,status"));
    let rep = json(&dir.path().join("two_level_1d.json"));
    assert_eq!(rep["skipped"].as_array().unwrap().len(), 81);
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
}

#[test]
fn table_rows_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let go = |name: &str| {
        run_ok(
            bin()
                .args([
                    "table",
                    "multilevel_1d",
                    "--p",
                    "1",
                    "--m",
                    "8,16",
                    "--speed",
                    "C2",
                    "--name",
                    name,
                    "--out",
                ])
                .arg(dir.path()),
        );
        std::fs::read(dir.path().join(format!("{name}.csv"))).unwrap()
    };
    let a = go("a");
    assert_eq!(a, go("b"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("multilevel_1d,1,C2,1,1,8,256,1024,corrected,backtrack,"));
}

#[test]
fn lfa_csv() {
    let out = run_ok(bin().args([
        "lfa",
        "--p",
        "1",
        "--m",
        "2,4",
        "--c-start",
        "0.9",
        "--c-end",
        "1.0",
    ]));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,m,c,rho,coarse_kind"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 22);
    for r in &rows {
        assert_eq!(r[4], "corrected");
        assert!(r[3].parse::<f64>().unwrap() < 1.0);
    }
    let last = rows.last().unwrap();
    assert_eq!(last[2], "1.000000");
    assert_eq!(last[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn verify_stability_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    run_ok(bin().args(["verify", "stability", "--out"]).arg(&path));
    let rep = json(&path);
    assert_eq!(rep["suite"], "stability");
    assert_eq!(rep["all_passed"], true);
    let out = run_ok(bin().args(["verify", "footnote_equivalence"]));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["all_passed"], true);
}
