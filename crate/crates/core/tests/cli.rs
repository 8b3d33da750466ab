use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const ETA4_PARAMS: &str =
    r#""params": {"g": 1.0, "kappa": 16.0, "pump_rate": 0.0625, "n_atoms": 100}"#;

fn laserlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laserlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run_ok(dir: &TempDir, cmd: &str, config: &Path, extra: &[&str]) -> String {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = laserlab(dir.path(), &args);
    assert!(
        out.status.success(),
        "{cmd} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV with leading `#` metadata, header dropped.
fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn report_for(dir: &TempDir, params: &str) -> serde_json::Value {
    let cfg = write_config(dir, "report.json", &format!("{{\"params\": {params}}}"));
    serde_json::from_str(&run_ok(dir, "report", &cfg, &["--self-check"])).unwrap()
}

#[test]
fn report_examples() {
    let dir = TempDir::new().unwrap();
    let eta4 = report_for(
        &dir,
        r#"{"g": 1.0, "kappa": 16.0, "pump_rate": 0.0625, "n_atoms": 100}"#,
    );
    assert!((eta4["report"]["squeezing"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(eta4["report"]["regime"], "BelowThreshold");

    let zero = report_for(
        &dir,
        r#"{"g": 1.0, "kappa": 16.0, "pump_rate": 1.0, "n_atoms": 100}"#,
    );
    assert!((zero["eta"].as_f64().unwrap() - 0.25).abs() < 1e-15);
    assert!(zero["report"]["squeezing"].as_f64().unwrap().abs() < 1e-15);

    let thr = report_for(
        &dir,
        r#"{"g": 1.0, "kappa": 16.0, "pump_rate": 0.25, "n_atoms": 100}"#,
    );
    let nbar = thr["report"]["nbar"].as_f64().unwrap();
    let nvar = thr["report"]["nvar"].as_f64().unwrap();
    assert!((nvar / (nbar * nbar) - 1.25).abs() < 1e-12);
}

#[test]
fn sweep_peaks_next_to_four() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "sweep.json", &format!("{{{ETA4_PARAMS}}}"));
    let rows = csv_rows(&run_ok(&dir, "sweep", &cfg, &["--self-check"]));
    assert_eq!(rows.len(), 401);
    let best = rows.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    let step = (1e4f64).ln() / 400.0;
    assert!((best[0].ln() - 4f64.ln()).abs() <= step);
    assert!((0.4999..=0.5).contains(&best[1]));

    let single = write_config(
        &dir,
        "one.json",
        &format!("{{{ETA4_PARAMS}, \"sweep\": {{\"eta\": [1.0]}}}}"),
    );
    let rows = csv_rows(&run_ok(&dir, "sweep", &single, &[]));
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn dynamics_ends_at_report_populations() {
    let dir = TempDir::new().unwrap();
    let params = r#"{"g": 0.5, "kappa": 1.0, "pump_rate": 0.25, "n_atoms": 100}"#;
    let cfg = write_config(
        &dir,
        "dyn.json",
        &format!("{{\"params\": {params}, \"dynamics\": {{\"max_records\": 11}}}}"),
    );
    let out = run_ok(&dir, "dynamics", &cfg, &["--self-check"]);
    assert!(out.contains("# method: rk4-fixed"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 11);
    let last = rows.last().unwrap();
    let report = report_for(&dir, params);
    for (col, key) in [(1, "na"), (2, "nb"), (3, "nc")] {
        let want = report["report"]["populations"][key].as_f64().unwrap();
        assert!((last[col] - want).abs() <= 1e-8 * want, "{key}");
    }
}

#[test]
fn gillespie_is_deterministic_and_accurate() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "g.json",
        r#"{"params": {"g": 2.0, "kappa": 16.0, "pump_rate": 0.25, "n_atoms": 1000},
            "gillespie": {"t_end": 1000.0, "burn_in": 50.0}}"#,
    );
    let a = run_ok(&dir, "gillespie", &cfg, &["--seed", "3", "--self-check"]);
    let b = run_ok(&dir, "gillespie", &cfg, &["--seed", "3"]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["metadata"]["seed"], 3);
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 3);
    for (rec, want) in records.iter().zip([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]) {
        let mean = rec["mean"].as_f64().unwrap();
        let se = rec["std_error"].as_f64().unwrap();
        assert!((mean - want).abs() <= 4.0 * se, "{rec}");
    }
    let c = run_ok(&dir, "gillespie", &cfg, &["--seed", "4"]);
    assert_ne!(a, c);
}

#[test]
fn correlate_emits_points() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        &format!(
            "{{{ETA4_PARAMS}, \"correlate\": {{\"n_traj\": 200, \"tau_grid\": [0.0, 2.0, 5.0]}}}}"
        ),
    );
    let out = run_ok(&dir, "correlate", &cfg, &[]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["points"].as_array().unwrap().len(), 3);
    assert_eq!(v["config"]["n_traj"], 200);
}

#[test]
fn band_column_is_constant_and_spectrum_written() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "b.json",
        &format!(
            "{{{ETA4_PARAMS}, \"band\": {{\"lambda\": [0.16, 1.6, 16.0, 160.0],
               \"spectrum\": {{\"half_width\": 40.0, \"points\": 81, \"out\": \"spec.csv\"}}}}}}"
        ),
    );
    let out_path = dir.path().join("band.csv");
    run_ok(
        &dir,
        "band",
        &cfg,
        &["--out", out_path.to_str().unwrap(), "--self-check"],
    );
    let rows = csv_rows(&std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!((r[3] - 0.5).abs() <= 1e-12);
    }
    let spec = std::fs::read_to_string(dir.path().join("spec.csv")).unwrap();
    assert!(spec.lines().any(|l| l == "omega,s_minus"));
    let s = csv_rows(&spec);
    assert_eq!(s.len(), 81);
    assert_eq!(s[0][1], s[80][1]);
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(&dir, "u.json", &format!("{{{ETA4_PARAMS}, \"colour\": 1}}"));
    let out = laserlab(
        dir.path(),
        &["report", "--config", unknown.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));

    let missing = laserlab(dir.path(), &["report", "--config", "nope.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = write_config(
        &dir,
        "b.json",
        r#"{"params": {"g": 1.0, "kappa": 0.0, "pump_rate": 1.0, "n_atoms": 10}}"#,
    );
    let out = laserlab(dir.path(), &["report", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa"));

    let out = laserlab(
        dir.path(),
        &["gillespie", "--config", unknown.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "d.json",
        r#"{"params": {"g": 1.0, "kappa": 1.0, "pump_rate": 10000.0, "n_atoms": 10},
            "dynamics": {"t_end": 200.0, "dt": 1.0}}"#,
    );
    let out = laserlab(dir.path(), &["dynamics", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            laserlab::cli::load_config(&path).unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 6);
}
