use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"{
  "mass_kg": 1e-17,
  "B0_T": 0.01,
  "eta_T_per_m": 40,
  "delta_Hz": 1000,
  "epsilon_T": 2.0895071250312525e-6
}"#;

fn sgi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgi")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_accepts_reference_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = sgi(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "ok");
}

#[test]
fn validate_names_the_violated_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("\"mass_kg\"", "\"chi_m_m3_per_kg\": 1e-9, \"mass_kg\""));
    let out = sgi(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("chi_m"), "{}", stdout(&out));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("\"B0_T\"", "\"B0_mT\""));
    assert_eq!(sgi(&["simulate", "--config", &cfg, "--out", "x"]).status.code(), Some(1));
}

#[test]
fn simulate_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out_dir = dir.path().join("out");
    let out = sgi(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let tau6 = summary["stage_times"]["tau6_s"].as_f64().unwrap();
    assert!((tau6 - 1.48).abs() < 0.01, "{tau6}");
    assert!(summary["dx_max_m"].as_f64().unwrap() > 2e-5);

    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "t_s,x_plus_m,v_plus_mps,x_minus_m,v_minus_mps,Bx_plus_T,Bx_minus_T,dx_m,dv_mps");
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((last[0] - tau6).abs() < 1e-12);
}

#[test]
fn eta_sweep_reports_closure_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out_dir = dir.path().join("sweep");
    let out = sgi(&[
        "sweep",
        "--param",
        "eta",
        "--values",
        "4,40,400",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        let product: f64 = cells[9].parse().unwrap();
        assert!((product - 59.0).abs() < 0.03 * 59.0, "{product}");
        assert_eq!(cells[13], "true");
    }
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["runs"], 3);
    assert_eq!(fit["failed"], 0);
}

#[test]
fn mass_below_floor_is_rejected() {
    let out = sgi(&["sweep", "--param", "mass", "--values", "1e-18,1e-17"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn calibration_recovers_reference_floor() {
    let out = sgi(&["calibrate-epsilon", "--target-tau1", "0.534", "--eta", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let eps = v["epsilon_T"].as_f64().unwrap();
    assert!((eps - 2.0895e-6).abs() < 1e-9, "{eps}");
}

#[test]
fn phase_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = sgi(&["phase", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let exact = v["dtheta_exact"].as_f64().unwrap();
    let numeric = v["dtheta_numeric"].as_f64().unwrap();
    assert!((exact - numeric).abs() <= 1e-4 * numeric.abs());
    assert!(v["dB0_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(sgi(&["validate", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    // A regular file where the output directory should go.
    let blocker = dir.path().join("blocked");
    fs::write(&blocker, "").unwrap();
    let out = sgi(&["simulate", "--config", &cfg, "--out", blocker.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_arguments_exit_with_config_code() {
    assert_eq!(sgi(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sgi(&["sweep", "--param", "delta", "--values", "1"]).status.code(), Some(1));
}
