//! End-to-end runs of the compiled binary: exit-status contract, artifact
//! layout, and byte-level determinism across processes and thread counts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_convex-decay"))
}

fn write_config(dir: &Path, name: &str, json: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process was killed by a signal")
}

#[test]
fn lattice_runs_are_deterministic_across_thread_counts() {
    let work = tempfile::tempdir().unwrap();
    let config = write_config(
        work.path(),
        "lattice.json",
        r#"{"experiment": "lattice", "body": {"name": "disk"},
            "lattice_grid": {"k_lo": 10, "k_hi": 500, "count": 60}}"#,
    );

    let mut outputs = Vec::new();
    for (label, threads) in [("a", "1"), ("b", "2"), ("c", "1")] {
        let out_dir = work.path().join(label);
        let out = bin()
            .args(["lattice", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_dir)
            .args(["--threads", threads])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("lattice: pass"), "stdout: {stdout}");
        outputs.push(out_dir);
    }

    for file in ["records.csv", "summary.json", "manifest.json"] {
        let first = fs::read(outputs[0].join(file)).unwrap();
        for other in &outputs[1..] {
            assert_eq!(first, fs::read(other.join(file)).unwrap(), "{file} differs");
        }
    }
    let records = fs::read_to_string(outputs[0].join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 61);
}

#[test]
fn invalid_configs_exit_2_and_write_nothing() {
    let work = tempfile::tempdir().unwrap();
    let out_dir = work.path().join("out");

    let cases = [
        ("broken.json", r#"{"experiment": "slab", "#),
        ("unknown.json", r#"{"experiment": "telepathy"}"#),
        ("extra.json", r#"{"experiment": "slab", "turbo": true}"#),
        (
            "bad-threshold.json",
            r#"{"experiment": "slab", "thresholds": {"trend_max": -1.0}}"#,
        ),
    ];
    for (name, json) in cases {
        let config = write_config(work.path(), name, json);
        let out = bin()
            .args(["slab", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(code(&out), 2, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out_dir.exists(), "{name} left artifacts behind");
    }

    // Missing config file, and a run with no output directory anywhere.
    let out = bin()
        .args(["slab", "--config"])
        .arg(work.path().join("absent.json"))
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let config = write_config(work.path(), "no-out.json", r#"{"experiment": "slab"}"#);
    let out = bin().args(["slab", "--config"]).arg(&config).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(!out_dir.exists());
}

#[test]
fn subcommands_reject_experiments_from_other_families() {
    let work = tempfile::tempdir().unwrap();
    let config = write_config(
        work.path(),
        "lattice.json",
        r#"{"experiment": "lattice", "body": {"name": "disk"}}"#,
    );
    let out = bin()
        .args(["verify", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(work.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("does not belong"), "stderr: {stderr}");
}

#[test]
fn failed_checks_exit_1_with_artifacts_intact() {
    let work = tempfile::tempdir().unwrap();
    // A decay exponent the circle cannot sustain: the trend test must fail.
    let config = write_config(
        work.path(),
        "too-steep.json",
        r#"{"experiment": "uniform", "body": {"name": "disk"}, "alpha": 0.8,
            "grid": {"directions": 8, "t_lo": 10.0, "t_hi": 1000.0, "points_per_decade": 6}}"#,
    );
    let out_dir = work.path().join("out");
    let out = bin()
        .args(["verify", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("uniform: FAIL"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], serde_json::Value::Bool(false));
}

#[test]
fn seed_flag_overrides_config_and_lands_in_manifest() {
    let work = tempfile::tempdir().unwrap();
    let config = write_config(
        work.path(),
        "seeded.json",
        r#"{"experiment": "lattice", "body": {"name": "square"}, "seed": 3,
            "lattice_grid": {"k_lo": 5, "k_hi": 200, "count": 50}}"#,
    );
    let out_dir = work.path().join("out");
    let out = bin()
        .args(["lattice", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .args(["--seed", "11"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], serde_json::json!(11));
}

#[test]
fn report_consolidates_runs_and_rejects_empty_directories() {
    let work = tempfile::tempdir().unwrap();
    let runs = work.path().join("runs");

    let lattice = write_config(
        work.path(),
        "lattice.json",
        r#"{"experiment": "lattice", "body": {"name": "disk"},
            "lattice_grid": {"k_lo": 10, "k_hi": 400, "count": 55}}"#,
    );
    let slab = write_config(
        work.path(),
        "slab.json",
        r#"{"experiment": "slab", "body": {"name": "disk"}, "alpha": 0.5,
            "grid": {"t_lo": 100.0, "t_hi": 100000.0, "points_per_decade": 8}}"#,
    );
    for (sub, config, label) in [("lattice", &lattice, "disk-lattice"), ("slab", &slab, "disk-slab")] {
        let out = bin()
            .args([sub, "--config"])
            .arg(config)
            .arg("--out")
            .arg(runs.join(label))
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }

    let out = bin().args(["report", "--out"]).arg(&runs).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(runs.join("report.md")).unwrap();
    assert!(report.contains("disk-lattice") && report.contains("disk-slab"));
    assert!(runs.join("disk-lattice.dat").exists());
    assert!(runs.join("disk-slab.dat").exists());

    let rerun = bin().args(["report", "--out"]).arg(&runs).output().unwrap();
    assert_eq!(code(&rerun), 0);
    assert_eq!(report, fs::read_to_string(runs.join("report.md")).unwrap());

    let empty = tempfile::tempdir().unwrap();
    let out = bin().args(["report", "--out"]).arg(empty.path()).output().unwrap();
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}
