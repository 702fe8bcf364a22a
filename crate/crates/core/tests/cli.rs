use std::path::Path;

use wdnflow::cli::{run_cli, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["wdnflow"];
    full.extend_from_slice(args);
    let code = run_cli(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const BASE: &str = r#"
network_path = "bundled:toy9"
seed = 3

[simulation]
duration_s = 7200
hydraulic_time_step_s = 300

[sensors]
pressure_nodes = ["J2", "J4", "J6", "J8"]
flow_links = ["P1"]
"#;

#[test]
fn inspect_reports_counts() {
    let (code, out, _) = cli(&["inspect", "bundled:toy9"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("nodes: 9, links: 10, violations: 0\n"), "{out}");
}

#[test]
fn inspect_flags_corrupt_files_with_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.inp", "[JUNCTIONS]\nJ1 10 1\n[PIPES]\nP1 J1\n");
    let (code, _, err) = cli(&["inspect", &path]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn inspect_lists_violations_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "dangling.inp",
        "[JUNCTIONS]\nJ1 10 1\n[PIPES]\nP1 J1 X 100 200 100\n",
    );
    let (code, out, _) = cli(&["inspect", &path]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("violation: ") && !out.contains("violations: 0"), "{out}");
}

#[test]
fn reversed_event_window_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{BASE}\n[[leakages]]\nkind = \"abrupt\"\nlink_id = \"P3\"\ndiameter = 0.01\nstart_time = 3600\nend_time = 600\n"
    );
    let path = write(dir.path(), "bad.toml", &cfg);
    let (code, _, err) = cli(&["run", "--config", &path]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("leakage"), "{err}");
}

#[test]
fn unknown_keys_report_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "typo.toml",
        &format!("{BASE}\n[outputs]\nscada_csv = \"x.csv\"\n"),
    );
    let (code, _, err) = cli(&["run", "--config", &path]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn disconnected_demand_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cut.inp",
        "[JUNCTIONS]\nJ1 0 1\nJ2 0 1\n[RESERVOIRS]\nR1 50\n[PIPES]\nP1 R1 J1 100 200 100\nP2 J1 J2 100 200 100 0 Closed\n",
    );
    let cfg = "network_path = \"cut.inp\"\n[simulation]\nduration_s = 600\nhydraulic_time_step_s = 300\n";
    let path = write(dir.path(), "cut.toml", cfg);
    let (code, _, err) = cli(&["run", "--config", &path]);
    assert_eq!(code, EXIT_SOLVER, "{err}");
}

#[test]
fn run_then_detect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{BASE}\n[outputs]\nscada_csv_path = \"s.csv\"\ntruth_csv_path = \"t.csv\"\n");
    let path = write(dir.path(), "ok.toml", &cfg);
    let out_dir = dir.path().join("out");
    let (code, out, err) = cli(&["run", "--config", &path, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("steps: 24"), "{out}");
    let csv = std::fs::read_to_string(out_dir.join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
    assert_eq!(
        std::fs::read_to_string(out_dir.join("t.csv")).unwrap().lines().count(),
        1
    );

    let scada = out_dir.join("s.csv");
    let scada = scada.to_str().unwrap();
    let (code, out, _) = cli(&["detect", scada]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("train_rows: 12") && out.contains("test_rows: 12"), "{out}");
    let (code, out, _) = cli(&["detect", scada, "--split", "24"]);
    assert_eq!(code, EXIT_CONFIG, "{out}");
    let (code, _, err) = cli(&["detect", scada, "--split", "0"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("split"), "{err}");
}

#[test]
fn detect_on_its_own_training_rows_is_silent() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ok.toml", BASE);
    let (code, _, err) = cli(&["run", "--config", &path]);
    assert_eq!(code, EXIT_OK, "{err}");
    let data =
        wdnflow::scada::ScadaData::from_csv(&std::fs::read_to_string(dir.path().join("scada.csv")).unwrap()).unwrap();
    let det = wdnflow::detection::SensorInterpolationDetector::fit(data.rows()).unwrap();
    assert!(det.apply(data.rows()).unwrap().suspicious_time_indices.is_empty());
}

#[test]
fn malformed_csv_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.csv", "time_s,pressure:J1\n0,1.0\n300,abc\n");
    let (code, _, err) = cli(&["detect", &path]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn jobs_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let noisy = format!("{BASE}\n[[uncertainties]]\nkind = \"gauss_abs\"\nsigma = 0.1\ntarget = \"sensor_noise\"\n");
    let a = write(
        dir.path(),
        "a.toml",
        &format!("{noisy}\n[outputs]\nscada_csv_path = \"a.csv\"\n"),
    );
    let b = write(
        dir.path(),
        "b.toml",
        &format!("{noisy}\n[outputs]\nscada_csv_path = \"b.csv\"\n"),
    );
    let (code, out, err) = cli(&["run", "--config", &a, "--config", &b, "--jobs", "2"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out.matches("config: ").count(), 2);
    let read = |n: &str| std::fs::read_to_string(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    let first = read("a.csv");
    assert_eq!(cli(&["run", "--config", &a, "--seed", "99"]).0, EXIT_OK);
    assert_ne!(read("a.csv"), first);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cli(&["run"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["frobnicate"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["--help"]).0, EXIT_OK);
}
