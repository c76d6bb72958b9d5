use std::path::Path;
use std::process::Command;

fn teichlab(args: &[&str], config: Option<&Path>) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_teichlab"));
    cmd.args(args).args(["--angles", "64", "--json"]);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn bers_succeeds_and_writes_run_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout) = teichlab(&["bers", "--out", out], None);
    assert_eq!(code, 0, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let hash = v["payload_hash"].as_str().unwrap();
    let run_dir = Path::new(v["run_dir"].as_str().unwrap());
    assert!(run_dir
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .ends_with(&hash[..8]));
    assert!(run_dir.join("record.json").exists());
    assert!(run_dir.join("series.csv").exists());
    // same seed, same payload
    let (_, again) = teichlab(&["bers"], None);
    let w: serde_json::Value = serde_json::from_str(&again).unwrap();
    assert_eq!(w["payload_hash"], v["payload_hash"]);
}

#[test]
fn config_errors_exit_4() {
    let (code, _) = teichlab(&["solve", "--resolution", "20"], None);
    assert_eq!(code, 4);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"solver": {"tol": -1.0}}"#);
    assert_eq!(teichlab(&["solve"], Some(&cfg)).0, 4);
    let broken = write_config(dir.path(), "{ not json");
    assert_eq!(teichlab(&["solve"], Some(&broken)).0, 4);
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"solver": {"tol": 1e-14, "max_iter": 2}, "solve": {"mu": {"kind": "radial_bump", "k": [0.6, 0.2]}}}"#,
    );
    let (code, stdout) = teichlab(&["solve"], Some(&cfg));
    assert_eq!(code, 3, "{stdout}");
    assert!(stdout.contains("\"code\":14"));
}

#[test]
fn failed_check_exits_2() {
    // a round-trip tolerance far below the discretization error
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"aw": {"tolerance": 1e-12}}"#);
    let (code, stdout) = teichlab(&["aw"], Some(&cfg));
    assert_eq!(code, 2, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["pass"]["round_trip"], false);
}

#[test]
fn small_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"seed": 1, "verify": {"trials": 5, "psi_trials": 3, "base_points": [0.5], "segments": 1,
            "segment_nodes": 4, "jacobian_levels": [0.1], "report_trials": 1}}"#,
    );
    let (code, stdout) = teichlab(&["verify", "--threads", "1"], Some(&cfg));
    assert_eq!(code, 0, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["pass"].as_object().unwrap().values().all(|b| b == true));
}
