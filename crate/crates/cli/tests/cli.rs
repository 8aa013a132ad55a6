use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn myxo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_myxo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv" || x == "bin"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn run_ok(args: &[&str]) {
    let out = myxo(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn reruns_and_thread_counts_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["simulate", "--n", "25", "--mu", "0.02", "--init", "random:0.05", "--seed", "3", "--t-end", "50"];
    let mut dirs = Vec::new();
    for (i, threads) in ["1", "1", "3"].iter().enumerate() {
        let dir = tmp.path().join(format!("run{i}"));
        let mut args = base.to_vec();
        args.extend(["--threads", threads, "--out", dir.to_str().unwrap()]);
        run_ok(&args);
        dirs.push(dir);
    }
    let first = csvs(&dirs[0]);
    assert_eq!(first.len(), 3);
    for d in &dirs[1..] {
        assert_eq!(csvs(d), first);
    }
}

#[test]
fn missing_output_directories_are_created() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("a/b/c");
    run_ok(&["spectrum", "--n", "9", "--out", dir.to_str().unwrap()]);
    let text = fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    assert!(text.starts_with("mode,lambda_closed,lambda_numeric,abs_err,rel_err\n"));
    assert_eq!(text.lines().count(), 7);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap();
    for key in ["version", "config", "rng", "wall_time_s", "seed"] {
        assert!(meta.get(key).is_some(), "{key}");
    }
}

#[test]
fn resolved_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run_ok(&[
        "simulate", "--n", "15", "--kernel", "maxwell", "--mu", "0.01", "--init", "plateaus:0.7,0.3",
        "--t-end", "20", "--snapshot-cadence", "50", "--out", a.to_str().unwrap(),
    ]);
    let config = a.join("config.json");
    run_ok(&["simulate", "--config", config.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(csvs(&a), csvs(&b));
    assert!(b.join("snapshots.csv").exists());
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"n": 9, "mu": 0.5, "max_mode": 3}"#).unwrap();
    let out = tmp.path().join("o");
    run_ok(&["spectrum", "--config", cfg.to_str().unwrap(), "--mu", "0.25", "--out", out.to_str().unwrap()]);
    let resolved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(resolved["n"], 9);
    assert_eq!(resolved["mu"], 0.25);
    assert_eq!(resolved["max_mode"], 3);
}

#[test]
fn config_errors_exit_with_two_and_a_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, "{\n  \"n\": 9,\n  \"speed\": 1\n}\n").unwrap();
    let out = myxo(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bad.json:3:"), "{msg}");

    let out = myxo(&["simulate", "--n", "8", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = myxo(&["simulate", "--init", "spiral:3", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three_and_leave_a_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let out = myxo(&["fixedpoint", "--N", "401", "--R", "16", "--max-iter", "2", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let dump: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("failure.json")).unwrap()).unwrap();
    assert_eq!(dump["command"], "fixedpoint");
    assert_eq!(dump["config"]["max_iter"], 2);
    assert!(tmp.path().join("residuals.csv").exists());
}

#[test]
fn spatial_snapshot_layout() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&[
        "spatial", "--nx", "4", "--ny", "3", "--n", "5", "--t-end", "0.2", "--snapshot", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    let bytes = fs::read(tmp.path().join("field_final.bin")).unwrap();
    assert_eq!(bytes.len(), 4 * 3 * 10 * 8);
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("field_final.json")).unwrap()).unwrap();
    assert_eq!(side["nx"], 4);
    assert_eq!(side["angular_points"], 10);
    let decay = fs::read_to_string(tmp.path().join("decay.csv")).unwrap();
    assert!(decay.starts_with("t,mass,l2_dist\n"));
}
