use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn holomimo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holomimo")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let o = holomimo(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.split("\r\n").filter(|l| !l.is_empty()).skip(2).collect()
}

const SMALL_MC: &str = r#"{
  "antenna": {"n_bs": 6, "n_elements": 12, "fan_range_deg": [50, 130]},
  "channel": {"n_users": 4, "calibration_realizations": 1000},
  "run": {"realizations": 40, "dump_channels": true}
}"#;

#[test]
fn design_table_has_one_row_per_element() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["design", "--out", out]);
    let csv = fs::read_to_string(dir.path().join("design.csv")).unwrap();
    let lines: Vec<&str> = csv.split("\r\n").collect();
    assert!(lines[0].starts_with("# holomimo"));
    assert!(lines[0].contains("\"n_bs\":20"));
    assert_eq!(lines[1], "surface_index,element_index,y,tuned_f0,alpha_re,alpha_im,residual");
    assert_eq!(data_rows(&csv).len(), 600);
}

#[test]
fn single_broadside_surface() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"antenna": {"n_bs": 1, "beam_angles_deg": [90]}}"#);
    let out = dir.path().join("o");
    run_ok(&["antenna-report", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("antenna_summary.json")).unwrap()).unwrap();
    let s = &summary["surfaces"];
    assert_eq!(s.as_array().unwrap().len(), 1);
    assert!(s[0]["pointing_error_deg"].as_f64().unwrap() <= 3.0);
    let patterns = fs::read_to_string(out.join("patterns.csv")).unwrap();
    assert_eq!(data_rows(&patterns).len(), 721);
    let sparams = fs::read_to_string(out.join("sparams.csv")).unwrap();
    assert_eq!(data_rows(&sparams).len(), 121);
}

#[test]
fn seed_and_thread_count_do_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_MC);
    let runs: Vec<_> = [("1", "both"), ("4", "both"), ("3", "again")]
        .iter()
        .map(|(threads, tag)| {
            let out = dir.path().join(format!("{threads}-{tag}"));
            run_ok(&["mc", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
            out
        })
        .collect();
    for f in ["mc_raw.csv", "mc_summary.json", "channels.csv"] {
        let a = fs::read(runs[0].join(f)).unwrap();
        for r in &runs[1..] {
            assert_eq!(a, fs::read(r.join(f)).unwrap(), "{f}");
        }
    }
    let raw = fs::read_to_string(runs[0].join("mc_raw.csv")).unwrap();
    assert_eq!(data_rows(&raw).len(), 40);
    let dump = fs::read_to_string(runs[0].join("channels.csv")).unwrap();
    assert_eq!(data_rows(&dump).len(), 40 * 6 * 4);

    let other = dir.path().join("seeded");
    run_ok(&["mc", "--config", &cfg, "--out", other.to_str().unwrap(), "--seed", "99"]);
    let seeded = fs::read_to_string(other.join("mc_raw.csv")).unwrap();
    assert_ne!(raw, seeded);
    assert!(seeded.lines().next().unwrap().contains("seed=99"));
}

#[test]
fn realizations_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_MC);
    let out = dir.path().join("o");
    run_ok(&["mc", "--config", &cfg, "--out", out.to_str().unwrap(), "--realizations", "7"]);
    let raw = fs::read_to_string(out.join("mc_raw.csv")).unwrap();
    assert_eq!(data_rows(&raw).len(), 7);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("mc_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["realizations"], 7);
    assert_eq!(summary["provenance"]["config"]["run"]["realizations"], 7);
    assert_eq!(summary["capacity_ms"]["cdf"].as_array().unwrap().len(), 512);
}

#[test]
fn sweep_grid_bookkeeping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "antenna": {"n_bs": 4, "fan_range_deg": [60, 120]},
  "channel": {"n_users": 3, "calibration_realizations": 1000},
  "run": {"sweep_realizations": 20, "sweep_n_elements": [10, 20], "sweep_sigma_deg": [5, 20, 40]}
}"#,
    );
    let out = dir.path().join("o");
    run_ok(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.split("\r\n").nth(1).unwrap(), "N_m,sigma,mean_C,mean_kappa,mean_C_rayleigh,mean_kappa_rayleigh");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("10,5.0,"));
    assert!(rows[5].starts_with("20,40.0,"));
}

#[test]
fn unknown_key_is_reported_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"run\": {\n    \"sed\": 3\n  }\n}\n");
    let o = holomimo(&["design", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("sed"), "{err}");
}
