//! End-to-end tests of the `enaqt` binary: artifact layout, headers,
//! determinism, and the error contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn enaqt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enaqt"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

fn fast_optimizer_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.json");
    let optimizer = r#""optimizer": {"learning_rate": 0.02, "beta1": 0.9, "beta2": 0.999,
        "epsilon": 1e-8, "min_steps": 30, "max_steps": 300, "grad_tol": 1e-8,
        "lower_bound": 1e-7, "upper_bound": 1.0, "strict_boundary_stop": false,
        "record_trajectory": false}"#;
    fs::write(&path, format!("{{\"schema_version\": 1, {optimizer}{extra}}}")).unwrap();
    path
}

#[test]
fn scan_reproduces_uniform_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let out = enaqt(&["scan", "--out-dir", "scan"], dir.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    for alpha in ["1", "3", "5"] {
        let csv = read(dir.path(), &format!("scan/scan_alpha{alpha}.csv"));
        assert!(csv.starts_with("# config: {"), "missing reproducibility header");
        assert!(csv.lines().count() > 50);
    }
    let peaks: serde_json::Value = serde_json::from_str(&read(dir.path(), "scan/scan_peaks.json")).unwrap();
    assert!(peaks["config"]["seed"].is_number());
    let pairs = peaks["peaks"].as_array().unwrap();
    assert_eq!(pairs.len(), 3);
    let expected = [(0.121, 1.87e-3), (0.079, 1.48e-3), (0.078, 1.47e-3)];
    for (pair, (gamma_u, eta_u)) in pairs.iter().zip(expected) {
        let g = pair["gamma_u"].as_f64().unwrap();
        let e = pair["eta_u"].as_f64().unwrap();
        assert!((g - gamma_u).abs() / gamma_u < 0.03, "gamma_u {g} vs {gamma_u}");
        assert!((e - eta_u).abs() / eta_u < 0.01, "eta_u {e} vs {eta_u}");
    }
}

#[test]
fn scan_half_bias_matches_reduced_ramp() {
    let dir = tempfile::tempdir().unwrap();
    let out = enaqt(&["scan", "--half-bias", "--alpha", "3", "--out-dir", "scan"], dir.path());
    assert!(out.status.success());
    let peaks: serde_json::Value = serde_json::from_str(&read(dir.path(), "scan/scan_peaks.json")).unwrap();
    let pair = &peaks["peaks"][0];
    let g = pair["gamma_u"].as_f64().unwrap();
    let e = pair["eta_u"].as_f64().unwrap();
    assert!((g - 0.0368).abs() / 0.0368 < 0.03, "half-bias gamma_u {g}");
    assert!((e - 2.47e-3).abs() / 2.47e-3 < 0.01, "half-bias eta_u {e}");
}

#[test]
fn optimize_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_optimizer_config(dir.path(), "");
    let args = [
        "optimize",
        "--config",
        cfg.to_str().unwrap(),
        "--system",
        "disorder",
        "--n-sites",
        "6",
        "--seed",
        "9",
        "--alpha",
        "5",
        "--grid-points",
        "21",
    ];
    let mut runs = Vec::new();
    for out_dir in ["a", "b"] {
        let mut full = args.to_vec();
        full.extend_from_slice(&["--out-dir", out_dir]);
        let out = enaqt(&full, dir.path());
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        runs.push(out_dir);
    }
    for name in [
        "profile_alpha5.csv",
        "populations_alpha5.csv",
        "ratio_map_alpha5.csv",
        "rho_optimized_alpha5.csv",
        "optimize_summary.json",
    ] {
        let a = read(dir.path(), &format!("a/{name}"));
        let b = read(dir.path(), &format!("b/{name}"));
        assert_eq!(a, b, "file {name} differs between identical runs");
    }
}

#[test]
fn optimize_emits_trajectory_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_optimizer_config(dir.path(), "");
    let out = enaqt(
        &[
            "optimize",
            "--config",
            cfg.to_str().unwrap(),
            "--system",
            "disorder",
            "--n-sites",
            "5",
            "--seed",
            "2",
            "--alpha",
            "3",
            "--grid-points",
            "15",
            "--trajectory",
            "--out-dir",
            "t",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "t/trajectory_alpha3.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config"));
    assert_eq!(lines.next().unwrap(), "step,eta,gamma_1,gamma_2,gamma_3,gamma_4,gamma_5");
    assert!(csv.lines().count() > 30);
}

#[test]
fn ensemble_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_optimizer_config(dir.path(), "");
    let out = enaqt(
        &[
            "ensemble",
            "--config",
            cfg.to_str().unwrap(),
            "--system",
            "disorder",
            "--n-sites",
            "6",
            "--realizations",
            "3",
            "--seed",
            "4",
            "--grid-points",
            "21",
            "--out-dir",
            "ens",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let ndjson = read(dir.path(), "ens/records.ndjson");
    let lines: Vec<&str> = ndjson.lines().collect();
    assert_eq!(lines.len(), 4, "header + 3 records");
    let header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(header["type"], "header");
    assert_eq!(header["schema_version"], 1);
    for line in &lines[1..] {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(record["schema_version"], 1);
        assert_eq!(record["energies"].as_array().unwrap().len(), 6);
        assert_eq!(record["blocks"].as_array().unwrap().len(), 3);
    }

    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "ens/ensemble_summary.json")).unwrap();
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0]["failures"], 0);
    assert_eq!(runs[0]["summaries"].as_array().unwrap().len(), 3);
    for name in ["gamma_histogram_alpha1.csv", "mismatch_boxplots_alpha5.csv", "flux_ell_boxplots_alpha3.csv"] {
        read(dir.path(), &format!("ens/{name}"));
    }
}

#[test]
fn ensemble_rejects_ramp_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = enaqt(&["ensemble", "--system", "ramp", "--out-dir", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn analytic3_landscapes_follow_tunneling_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = enaqt(&["analytic3", "--grid-points", "25", "--out-dir", "a3"], dir.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let argmax = |alpha: &str| -> (f64, f64) {
        let csv = read(dir.path(), &format!("a3/landscape_alpha{alpha}.csv"));
        let mut best = (0.0, 0.0, f64::MIN);
        for line in csv.lines().skip(2) {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            if v[2] > best.2 {
                best = (v[0], v[1], v[2]);
            }
        }
        (best.0, best.1)
    };
    // Short range: dephase mostly the middle site, keep the exit clean.
    let (g2, g3) = argmax("5");
    assert!(g2 > 0.02, "alpha=5 middle dephasing too small: {g2}");
    assert!(g3 < 0.01, "alpha=5 exit dephasing should be small: {g3}");
    // Long range: both sites want sizable dephasing.
    let (g2, g3) = argmax("1");
    assert!(g2 > 0.02 && g3 > 0.02, "alpha=1 wants both sites dephased: ({g2}, {g3})");

    // Oracle table: errors shrink monotonically as J decreases.
    let table = read(dir.path(), "a3/oracle_comparison.csv");
    let mut by_mode: std::collections::HashMap<(String, String), Vec<(f64, f64)>> = Default::default();
    for line in table.lines().skip(2) {
        let cells: Vec<&str> = line.split(',').collect();
        let key = (cells[0].to_string(), format!("{},{}", cells[2], cells[3]));
        by_mode.entry(key).or_default().push((cells[1].parse().unwrap(), cells[6].parse().unwrap()));
    }
    assert!(!by_mode.is_empty());
    for ((mode, gammas), mut rows) in by_mode {
        rows.sort_by(|a, b| b.0.total_cmp(&a.0));
        for pair in rows.windows(2) {
            assert!(
                pair[1].1 < pair[0].1,
                "{mode} at ({gammas}): error did not shrink with J: {rows:?}"
            );
        }
    }
}

#[test]
fn bad_grid_is_a_usage_error_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = enaqt(&["scan", "--grid-points", "1", "--out-dir", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert_eq!(err["kind"], "usage");
    assert!(err["error"].as_str().unwrap().contains("grid"));
    assert!(!dir.path().join("nope").exists(), "no files on usage error");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"schema_version": 1, "not_a_key": true}"#).unwrap();
    let out = enaqt(&["scan", "--config", cfg.to_str().unwrap(), "--out-dir", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("not_a_key"));
}

#[test]
fn wrong_schema_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("old.json");
    fs::write(&cfg, r#"{"schema_version": 99}"#).unwrap();
    let out = enaqt(&["scan", "--config", cfg.to_str().unwrap(), "--out-dir", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn chain_file_system_loads_spec() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("chain.json");
    fs::write(
        &chain,
        r#"{"n_sites": 4, "energies": [0.0, -0.25, -0.5, -0.75], "alpha": 5.0, "j_max": 0.1}"#,
    )
    .unwrap();
    let out = enaqt(
        &[
            "scan",
            "--system",
            "file",
            "--chain-file",
            chain.to_str().unwrap(),
            "--alpha",
            "5",
            "--grid-points",
            "21",
            "--out-dir",
            "s",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "s/scan_alpha5.csv");
    assert!(csv.lines().count() > 20);

    // Missing chain file is a usage error.
    let out = enaqt(&["scan", "--system", "file", "--out-dir", "y"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
