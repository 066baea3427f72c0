use std::path::Path;
use std::process::{Command, Output};

fn flatstrip(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatstrip"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn same_seed_gives_identical_artifacts() {
    for sub in ["flow", "strips", "jacobi"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let cfg = a.path().join("small.cfg");
        std::fs::write(&cfg, "jacobi.samples = 4\nstrips.samples = 4\n").unwrap();
        let cfg = cfg.to_str().unwrap();
        assert!(flatstrip(a.path(), &[sub, "--seed", "3", "--config", cfg]).status.success());
        assert!(flatstrip(b.path(), &[sub, "--seed", "3", "--config", cfg]).status.success());
        let (ma, mb) = (manifest(a.path()), manifest(b.path()));
        assert_eq!(ma["outputs"], mb["outputs"], "{sub}");
    }
}

#[test]
fn different_seeds_differ() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = a.path().join("small.cfg");
    std::fs::write(&cfg, "jacobi.samples = 3\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    flatstrip(a.path(), &["jacobi", "--seed", "1", "--config", cfg]);
    flatstrip(b.path(), &["jacobi", "--seed", "2", "--config", cfg]);
    assert_ne!(std::fs::read(a.path().join("jacobi.csv")).unwrap(), std::fs::read(b.path().join("jacobi.csv")).unwrap());
}

#[test]
fn manifest_lists_every_artifact_with_its_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = flatstrip(dir.path(), &["periodic"]);
    assert!(out.status.success());
    let m = manifest(dir.path());
    assert_eq!(m["subcommand"], "periodic");
    assert_eq!(m["partial"], false);
    let mut names: Vec<String> = m["outputs"].as_array().unwrap().iter().map(|o| o["name"].as_str().unwrap().to_string()).collect();
    names.sort();
    assert_eq!(names, ["growth.csv", "periodic.csv"]);
    for o in m["outputs"].as_array().unwrap() {
        use sha2::Digest;
        let bytes = std::fs::read(dir.path().join(o["name"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), hex::encode(sha2::Sha256::digest(&bytes)));
    }
    let growth = std::fs::read_to_string(dir.path().join("growth.csv")).unwrap();
    assert!(growth.starts_with("T,count,slope,corrected_slope\n"));
    assert_eq!(growth.lines().count(), 6);
}

#[test]
fn json_format_writes_json_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(flatstrip(dir.path(), &["flow", "--format", "json"]).status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("trajectory.json")).unwrap()).unwrap();
    assert!(v.as_array().unwrap().len() > 10);
}

#[test]
fn checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = flatstrip(dir.path(), &["checks"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert!(!text.contains(",false"));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "no.such.key = 1\n").unwrap();
    assert_eq!(flatstrip(dir.path(), &["flow", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(flatstrip(dir.path(), &["flow", "--config", "/nonexistent/x.cfg"]).status.code(), Some(2));
    assert_eq!(flatstrip(dir.path(), &["flow", "--budget", "-1"]).status.code(), Some(2));
}

#[test]
fn unsupported_model_operation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("collar.cfg");
    std::fs::write(&cfg, "model.kind = collar\n").unwrap();
    assert_eq!(flatstrip(dir.path(), &["busemann", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn exhausted_budget_exits_3_with_partial_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = flatstrip(dir.path(), &["jacobi", "--budget", "1e-9"]);
    assert_eq!(out.status.code(), Some(3));
    let m = manifest(dir.path());
    assert_eq!(m["partial"], true);
    assert!(dir.path().join("jacobi.csv").exists());
}
