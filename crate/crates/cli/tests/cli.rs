use std::fs;
use std::process::{Command, Output};

fn freechoice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freechoice"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn table_csv_has_every_pair() {
    let out = freechoice(&["table", "--n", "12", "--p", "0.8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,expected_spread,rounded"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 66);
    assert!(rows[0].starts_with("1,2,") && rows[0].ends_with(",0.319"));
    assert!(rows
        .iter()
        .any(|r| r.starts_with("1,12,") && r.ends_with(",-1.031")));
}

#[test]
fn table_without_noise_is_zero() {
    let out = freechoice(&["table", "--n", "6", "--p", "0"]);
    assert!(out.status.success());
    for row in stdout(&out).lines().skip(1) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0, "{row}");
        assert_eq!(fields[3], "0.000");
    }
}

#[test]
fn table_rational_json() {
    let out = freechoice(&[
        "table",
        "--n",
        "5",
        "--p",
        "0.5",
        "--format",
        "json",
        "--exact-rational",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["exact_sum"], "0");
    assert_eq!(v["entries"].as_array().unwrap().len(), 10);
    assert!(v["entries"][0]["exact"].as_str().unwrap().contains('/'));
}

#[test]
fn table_rejects_bad_parameters() {
    assert_eq!(freechoice(&["table", "--n", "1"]).status.code(), Some(2));
    assert_eq!(freechoice(&["table", "--p", "1.0"]).status.code(), Some(2));
    assert_eq!(freechoice(&["table", "--p", "-0.2"]).status.code(), Some(2));
}

#[test]
fn table_writes_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = freechoice(&["table", "--n", "4", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 7);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "table");
    assert_eq!(manifest["parameters"]["n"], 4);
}

#[test]
fn simulate_e3_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let prefix = dir.path().join(name);
        let out = freechoice(&[
            "simulate",
            "--design",
            "e3",
            "--n",
            "15",
            "--seed",
            "9",
            "--output",
            prefix.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        fs::read(dir.path().join(format!("{name}.csv"))).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 106);
    assert!(dir.path().join("a.manifest.json").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["subjects"], 105);
    assert!(summary["exact"]["mean"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn simulate_thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let prefix = dir.path().join(name);
        let out = freechoice(&[
            "--threads",
            threads,
            "simulate",
            "--design",
            "e2",
            "--subjects",
            "500",
            "--format",
            "json",
            "--output",
            prefix.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        fs::read(dir.path().join(format!("{name}.jsonl"))).unwrap()
    };
    assert_eq!(run("one", "1"), run("four", "4"));
}

#[test]
fn simulate_needs_pair_for_fixed_designs() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("x");
    let out = freechoice(&[
        "simulate",
        "--design",
        "e0",
        "--output",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = freechoice(&[
        "simulate",
        "--design",
        "e2",
        "--model",
        "two-param",
        "--output",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_into_missing_directory_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("missing").join("x");
    let out = freechoice(&[
        "simulate",
        "--design",
        "e2",
        "--output",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn power_reports_json() {
    let out = freechoice(&[
        "power",
        "--design",
        "e2",
        "--replications",
        "50",
        "--subjects",
        "40",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["replications"], 50);
    let rate = v["rejection_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));
}

#[test]
fn power_rejects_zero_replications() {
    let out = freechoice(&["power", "--design", "e2", "--replications", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = freechoice(&["power", "--design", "e2", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_quick_passes() {
    let out = freechoice(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| !l.starts_with("FAIL")));
}

#[test]
fn verify_catches_sign_fault() {
    let out = freechoice(&["verify", "--inject-sign-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL reference-table"));
}

#[test]
fn zero_threads_is_usage_error() {
    assert_eq!(
        freechoice(&["--threads", "0", "verify"]).status.code(),
        Some(2)
    );
}
