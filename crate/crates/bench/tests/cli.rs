use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn phmor(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phmor"))
        .args(args)
        .current_dir(dir)
        .env_remove("PHMOR_DENSE_LIMIT")
        .output()
        .unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

const SMALL: &str = r#"
seed = 3

[model]
kind = "msd_chain"
n_masses = 15

[grid]
t_end = 4.0
n_steps = 200

[basis]
n = 4
n_a = 8
n_h = 8
"#;

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(&path, SMALL).unwrap();
    path.display().to_string()
}

#[test]
fn run_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    for out in ["a", "b"] {
        let o = phmor(&["run", "--config", &cfg, "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["bounds.csv", "effectivity.csv", "components.csv", "summary.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f} differs between runs");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 3);
    assert_eq!(manifest["tolerances"]["rigor_slack"], 1e-6);
    for f in ["bounds.csv", "effectivity.csv", "components.csv", "summary.csv"] {
        assert!(manifest["columns"][f].is_object(), "{f} undocumented");
        assert!(manifest["files"][f].is_string());
    }
    let header = fs::read_to_string(dir.path().join("a/bounds.csv")).unwrap();
    assert!(header.starts_with("time,series,value\n"));
    assert!(manifest["rigor"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["passed"] == true));
}

#[test]
fn bounds_flag_selects_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = phmor(
        &[
            "run",
            "--config",
            &cfg,
            "--out",
            "o",
            "--bounds",
            "standard,hier",
            "--fom-solver",
            "midpoint",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("o/summary.csv")).unwrap();
    assert!(summary.contains("max_eff_hier") && !summary.contains("max_eff_alp"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[basis]\nn = \"ten\"\n").unwrap();
    assert_eq!(
        phmor(&["run", "--config", "bad.toml"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        phmor(&["run", "--config", "missing.toml"], dir.path()).status.code(),
        Some(4)
    );
    assert_eq!(
        phmor(&["run", "--fom-solver", "rk4"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        phmor(&["validate", &fixture("bad_index.mtx")], dir.path())
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        phmor(&["validate", &fixture("invalid/manifest.toml")], dir.path())
            .status
            .code(),
        Some(3)
    );
    let ok = phmor(&["validate", &fixture("small/manifest.toml")], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("H_spd"));
}

#[test]
fn rank_deficient_alp_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("n_steps = 200", "n_steps = 5")
        .replace("n_a = 8", "n_a = 12");
    fs::write(dir.path().join("c.toml"), text).unwrap();
    let o = phmor(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stage basisgen") && err.contains("rank"), "{err}");
}

#[test]
fn dense_limit_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_phmor"))
        .args(["run", "--out", "o"])
        .current_dir(dir.path())
        .env("PHMOR_DENSE_LIMIT", "50")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dense limit"));
}

#[test]
fn gen_then_run_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    assert!(phmor(&["gen", "--config", &cfg, "--out", "model"], dir.path())
        .status
        .success());
    let file_cfg = SMALL.replace(
        "kind = \"msd_chain\"\nn_masses = 15",
        "kind = \"file\"\nmanifest = \"model/manifest.toml\"",
    );
    fs::write(dir.path().join("file.toml"), file_cfg).unwrap();
    let a = phmor(&["run", "--config", &cfg, "--out", "a"], dir.path());
    let b = phmor(&["run", "--config", "file.toml", "--out", "b"], dir.path());
    assert!(
        a.status.success() && b.status.success(),
        "{}",
        String::from_utf8_lossy(&b.stderr)
    );
    assert_eq!(
        fs::read(dir.path().join("a/bounds.csv")).unwrap(),
        fs::read(dir.path().join("b/bounds.csv")).unwrap()
    );
}

#[test]
fn prop1_command_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = phmor(
        &["prop1", "--config", &cfg, "--out", "p", "--prop1-tol", "1e-8"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("Delta_A") && stdout.contains("Certified"));
    assert!(stdout.contains("PreconditionUnmet"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not met"));
    let summary = fs::read_to_string(dir.path().join("p/prop1_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 15);
}
