use std::path::Path;
use std::process::{Command, Output};

fn bresse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bresse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn preset_text() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/paper-5.1.cfg")).unwrap()
}

#[test]
fn validate_preset() {
    let o = bresse(&["validate", "--config", "paper-5.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("attractor_condition = false"), "{text}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, preset_text().replace("rho2 = 1", "rho3 = 1")).unwrap();
    let o = bresse(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho3"));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = bresse(&["run", "--config", "/nonexistent/beam.cfg"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn run_writes_outputs_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = bresse(&[
        "run",
        "--config",
        "paper-5.1",
        "--out",
        out.to_str().unwrap(),
        "--t-end",
        "0.2",
        "--n-per-unit",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let diag = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let header = diag.lines().next().unwrap();
    assert!(header.starts_with("t,E,kinetic,thermal,potential,dissipation_rate,stationarity_gap,balance_residual"));
    let last = diag.lines().last().unwrap();
    assert!(last.starts_with("0.2,"), "{last}");
    for probe in ["phi_x=2", "psi_x=2", "omega_x=2", "u_x=6", "v_x=6", "w_x=6"] {
        assert!(out.join("probes").join(format!("{probe}.csv")).exists(), "{probe}");
    }
}

#[test]
fn scans_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bresse(&[
        "l-scan", "--config", "paper-5.1", "--out", out, "--t-end", "0.2", "--l-values", "0.1,0.01",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.path().join("l-scan/convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let o = bresse(&[
        "chi-scan", "--config", "paper-5.2", "--out", out, "--t-end", "0.2", "--chi", "1,10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.path().join("chi-scan/convergence.csv")).unwrap();
    assert!(table.lines().next().unwrap().ends_with("sup|psi+phi_x|,sup|v+u_x|"));
}

#[test]
fn decay_refuses_heat_sources() {
    let o = bresse(&["decay", "--config", "paper-5.1", "--t-end", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn decay_without_heat_sources() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.cfg");
    std::fs::write(&path, preset_text().replace("h1 = x", "h1 = 0")).unwrap();
    let o = bresse(&[
        "decay",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--t-end",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("decay/series.csv").exists());
}
