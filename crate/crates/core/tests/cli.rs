use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_kickchain");

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

const EVOLVE: &str = r#"
[chain]
n_sites = 6

[drive]
tau = 1.5
n_kicks = 12

[run]
states = ["omega0", "omega1", "omega2"]
"#;

const SWEEP: &str = r#"
[chain]
n_sites = 6

[run]
mode = "sweep"
states = ["omega0"]
axis = "j2_over_j1"
grid = [-1.0]
m_max = 20
tau_range = { start = 0.5, stop = 2.0, step = 0.5 }
"#;

#[test]
fn evolve_csv_schema_is_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.toml", EVOLVE);
    let out = dir.path().join("e.csv");
    run_ok(&["evolve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let head: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
    assert_eq!(head, golden("evolve_head.csv"));
    assert_eq!(text.lines().count(), 1 + 13);
    // 17 significant digits on an inexact value.
    let third = text.lines().nth(3).unwrap();
    assert!(third.starts_with("2,3,1.5,"));
}

#[test]
fn json_mirrors_csv_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.toml", &format!("{EVOLVE}\n[output]\nformat = \"json\"\n"));
    let out = run_ok(&["evolve", "--config", cfg.to_str().unwrap()]);
    let records: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(records.len(), 13);
    let keys: Vec<&str> = records[0].keys().map(String::as_str).collect();
    let header = golden("evolve_head.csv");
    let columns: Vec<&str> = header.lines().next().unwrap().split(',').collect();
    assert_eq!(keys, columns);
    assert_eq!(records[0]["fidelity_omega2"], 0.5);
}

#[test]
fn one_point_sweep_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SWEEP);
    let out = run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--workers", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(format!("{}\n", lines.next().unwrap()), golden("sweep_header.csv"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "-1");
    assert_eq!(row[1], "omega0");
    assert_eq!(row[6], "base");
    assert_eq!(row[7], "kicked");
    assert!(lines.next().is_none());
}

#[test]
fn periodogram_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", "[chain]\nn_sites = 6\n[drive]\nn_kicks = 63\n");
    let out = run_ok(&["periodogram", "--config", cfg.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(format!("{}\n", text.lines().next().unwrap()), golden("periodogram_header.csv"));
    assert_eq!(text.lines().count(), 1 + 33);
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 1);
}

#[test]
fn validate_and_conformance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.toml", "[run]\nsamples = 50\n");
    let out = run_ok(&["validate", "--config", cfg.to_str().unwrap()]);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["valid"], true);

    let report = dir.path().join("nested/conformance.csv");
    run_ok(&[
        "validate",
        "--conformance",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        report.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(format!("{}\n", text.lines().next().unwrap()), golden("conformance_header.csv"));
    assert!(text.lines().count() > 1);
}

#[test]
fn failures_emit_an_error_record() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text, kind) in [
        ("bad_site.toml", "[impurity]\nkind = \"type_i\"\nsite = 1\nstrength = 1.5\n", "simulation"),
        ("bad_tau.toml", "[drive]\ntau = -1.0\n", "simulation"),
        ("bad_key.toml", "[chain]\nsites = 4\n", "parse"),
    ] {
        let cfg = write_config(dir.path(), name, text);
        let out = run(&["evolve", "--config", cfg.to_str().unwrap()]);
        assert!(!out.status.success());
        let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(record["error"], kind, "{name}");
        assert!(record["message"].as_str().unwrap().len() > 5);
    }
    let out = run(&["sweep", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert!(!out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "io");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", &SWEEP.replace("grid = [-1.0]", "grid = [-1.0, 0.0, 1.0]"));
    let a = run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--workers", "1", "--seed", "5"]).stdout;
    let b = run_ok(&["sweep", "--config", cfg.to_str().unwrap(), "--workers", "3", "--seed", "5"]).stdout;
    assert_eq!(a, b);
}
