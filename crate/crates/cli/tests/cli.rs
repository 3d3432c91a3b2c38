//! End-to-end checks of the `distill` binary: reproducible outputs, the
//! analyze table, and error reporting.

use std::path::Path;
use std::process::Command;

fn distill() -> Command {
    Command::new(env!("CARGO_BIN_EXE_distill"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn tiny_spec(dir: &Path, seed: u64) -> std::path::PathBuf {
    let spec = dir.join(format!("spec_{seed}.json"));
    let out = dir.join(format!("run_{seed}.csv"));
    write(
        &spec,
        &format!(
            r#"{{
  "kind": "custom",
  "initial": "superposition_one_body",
  "run": {{ "n_traj": 3, "seed": {seed}, "t_final": 6.0, "dt": 0.002, "sample_every": 1.0 }},
  "output": {{ "path": "{}", "format": "csv" }}
}}"#,
            out.display()
        ),
    );
    spec
}

#[test]
fn identical_spec_and_seed_give_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path(), 41);
    let csv = dir.path().join("run_41.csv");

    let status = distill().args(["run"]).arg(&spec).status().unwrap();
    assert!(status.success());
    let first = std::fs::read(&csv).unwrap();

    let status = distill().args(["run"]).arg(&spec).status().unwrap();
    assert!(status.success());
    let second = std::fs::read(&csv).unwrap();
    assert_eq!(first, second, "CSV must be byte-identical across reruns");

    // The sidecar hash matches the git-blob-style hash of the bytes.
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_41.meta.json")).unwrap())
            .unwrap();
    let expected = {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", first.len()).as_bytes());
        h.update(&first);
        format!("{:x}", h.finalize())
    };
    assert_eq!(meta["content_hash_sha256"], serde_json::json!(expected));
    assert_eq!(meta["resolved_config"]["n_traj"], serde_json::json!(3));

    // A different seed changes the data.
    let status = distill()
        .args(["run"])
        .arg(&spec)
        .args(["--seed", "42"])
        .status()
        .unwrap();
    assert!(status.success());
    let reseeded = std::fs::read(&csv).unwrap();
    assert_ne!(first, reseeded);
}

#[test]
fn csv_has_the_documented_columns_and_initial_values() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path(), 7);
    assert!(distill().args(["run"]).arg(&spec).status().unwrap().success());
    let text = std::fs::read_to_string(dir.path().join("run_7.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_fs,P,P1,P2,dP1_site,dP2_site,dP1_energy,dP2_energy,\
         dP1_bound_tight_energy,dP2_bound_tight_energy,dipole_eA,field_VperA"
    );
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(first.len(), 12);
    assert_eq!(first[0], 0.0);
    assert!((first[6] - 0.5).abs() < 1e-6, "dP1_energy starts at 1/2");
    assert!((first[1] - 1.0).abs() < 1e-9, "initial state is pure");
}

#[test]
fn fig1a_kind_starts_at_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("fig1a.json");
    let csv = dir.path().join("fig1a.csv");
    write(
        &spec,
        &format!(
            r#"{{
  "kind": "fig1a",
  "run": {{ "n_traj": 2, "t_final": 2.0, "dt": 0.002, "sample_every": 1.0 }},
  "output": {{ "path": "{}", "format": "csv" }}
}}"#,
            csv.display()
        ),
    );
    assert!(distill().args(["run"]).arg(&spec).status().unwrap().success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    let dp1_energy = first[6];
    assert!((dp1_energy - 0.5).abs() <= 1e-6);
    // The field column is identically zero for the free-evolution kinds.
    assert_eq!(first[11], 0.0);
}

#[test]
fn invalid_configs_fail_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, r#"{"kind": "fig2"}"#);
    let out = distill().args(["run"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("pulse"));

    write(&bad, r#"{"kind": "fig1a", "pulse": {"e0": 1.0, "t_w": 10.0}}"#);
    let out = distill().args(["run"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());

    write(&bad, r#"{"kind": "fig1a", "run": {"dt": 0.5}}"#);
    let out = distill().args(["run"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn analyze_reports_single_determinant_limits() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    write(
        &rho,
        r#"{"basis": [{"occ": 15, "m": 8}], "a": [[[1.0, 0.0]]]}"#,
    );
    let out = distill().args(["analyze"]).arg(&rho).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("purity P                       1.000000000000"));
    assert!(text.contains("reduced purity P1              4.000000000000"));
    assert!(text.contains("reduced purity P2              6.000000000000"));
    assert!(text.contains("distilled purity dP1           0.000000000000"));
}

#[test]
fn analyze_names_the_violated_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    // Trace 1.4.
    write(
        &rho,
        r#"{"basis": [{"occ": 3, "m": 4}, {"occ": 5, "m": 4}],
            "a": [[[0.7, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.7, 0.0]]]}"#,
    );
    let out = distill().args(["analyze"]).arg(&rho).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace"));

    // Not Hermitian.
    write(
        &rho,
        r#"{"basis": [{"occ": 3, "m": 4}, {"occ": 5, "m": 4}],
            "a": [[[0.5, 0.0], [0.3, 0.0]], [[0.1, 0.0], [0.5, 0.0]]]}"#,
    );
    let out = distill().args(["analyze"]).arg(&rho).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Hermitian"));

    // Hermitian, unit trace, but indefinite.
    write(
        &rho,
        r#"{"basis": [{"occ": 3, "m": 4}, {"occ": 5, "m": 4}],
            "a": [[[0.5, 0.0], [0.9, 0.0]], [[0.9, 0.0], [0.5, 0.0]]]}"#,
    );
    let out = distill().args(["analyze"]).arg(&rho).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive semidefinite"));
}

#[test]
fn analyze_with_unitary_adds_the_rotated_column() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    write(
        &rho,
        r#"{"basis": [{"occ": 1, "m": 2}, {"occ": 2, "m": 2}],
            "a": [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]]}"#,
    );
    let u = dir.path().join("u.json");
    write(
        &u,
        &format!(
            r#"{{"m": 2, "u": [[{s}, 0.0], [{s}, 0.0], [{s}, 0.0], [{}, 0.0]]}}"#,
            -s
        ),
    );
    let report = dir.path().join("report.json");
    let out = distill()
        .args(["analyze"])
        .arg(&rho)
        .args(["--unitary"])
        .arg(&u)
        .args(["--output"])
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("rotated"));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    // dP1 = 1/2 in the native basis, 0 in the superposition's eigenbasis.
    let native = parsed["native"]["dp1"].as_f64().unwrap();
    let rotated = parsed["rotated"]["dp1"].as_f64().unwrap();
    assert!((native - 0.5).abs() < 1e-12);
    assert!(rotated.abs() < 1e-12);
}

#[test]
fn validate_scopes_run_clean() {
    for scope in ["fock", "rdm"] {
        let out = distill().args(["validate", scope]).output().unwrap();
        assert!(
            out.status.success(),
            "validate {scope}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("pass"));
    }
}
