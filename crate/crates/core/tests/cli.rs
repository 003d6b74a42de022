use std::path::Path;
use std::process::{Command, Output};

fn ctasim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctasim"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

const SMALL: [&str; 8] = [
    "--agents",
    "2000",
    "--replicates",
    "1",
    "--set",
    "horizon_days=30",
    "--set",
    "initial_infected=20",
];

fn with_out<'a>(cmd: &'a str, out: &'a Path, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd, "--out", out.to_str().unwrap()];
    v.extend(SMALL);
    v.extend(extra);
    v
}

fn has_sidecar(path: &Path) -> bool {
    path.exists() && path.with_extension("meta.json").exists()
}

#[test]
fn generate_population_writes_agents_and_edges() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctasim(&with_out("generate-population", dir.path(), &[]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agents = std::fs::read_to_string(dir.path().join("agents.csv")).unwrap();
    assert!(agents.starts_with("id,age,sex,zone,household,employment,workplace_or_class,has_cta\n"));
    assert_eq!(agents.lines().count(), 2001);
    assert!(has_sidecar(&dir.path().join("edges.csv")));
}

#[test]
fn run_is_reproducible_from_its_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctasim(&with_out("run", dir.path(), &["--verbose", "--seed", "17"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let daily = dir.path().join("daily_0.csv");
    assert!(has_sidecar(&daily));
    assert!(has_sidecar(&dir.path().join("infections_0.csv")));

    let again = tempfile::tempdir().unwrap();
    let sidecar = daily.with_extension("meta.json");
    let out = ctasim(&[
        "run",
        "--out",
        again.path().to_str().unwrap(),
        "--config",
        sidecar.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(&daily).unwrap(),
        std::fs::read(again.path().join("daily_0.csv")).unwrap()
    );
}

#[test]
fn filtered_sweep_runs_only_the_selected_cells() {
    let dir = tempfile::tempdir().unwrap();
    let filters = [
        "--cta",
        "0,0.8",
        "--capacity",
        "0.03,inf",
        "--compliance",
        "0.9",
        "--policy",
        "priority",
        "--workers",
        "1",
    ];
    let out = ctasim(&with_out("sweep", dir.path(), &filters));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).filter(|l| !l.starts_with("reference")).collect();
    assert_eq!(rows.len(), 4, "{summary}");
    assert!(has_sidecar(&dir.path().join("summary.csv")));
    assert!(has_sidecar(&dir.path().join("replicates.csv")));
    assert!(has_sidecar(&dir.path().join("timeseries").join("reference.csv")));
}

#[test]
fn sensitivity_sweep_covers_values_capacities_and_adoption() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctasim(&with_out(
        "sweep",
        dir.path(),
        &["--sensitivity", "beta_c", "--values", "0.03,0.05", "--workers", "1"],
    ));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sensitivity_beta_c.csv")).unwrap();
    // 2 values x 2 capacities x 5 adoption levels
    assert_eq!(csv.lines().count(), 21, "{csv}");
}

#[test]
fn calibrate_and_contacts_report_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctasim(&with_out("calibrate", dir.path(), &["--grid", "0.05,0.08", "--workers", "1"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.is_object());
    assert!(has_sidecar(&dir.path().join("calibration.csv")));

    let out = ctasim(&with_out("contacts-report", dir.path(), &["--days", "2"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["agent_days"], 4000);
    assert!(report["mean"].as_f64().unwrap() > 0.0);
}

#[test]
fn bad_input_exits_with_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    for extra in [["--set", "disease.no_such_field=1"], ["--set", "disease.beta_c=2"]] {
        let out = ctasim(&with_out("run", dir.path(), &extra));
        assert_eq!(out.status.code(), Some(2));
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(err["error"].is_string(), "{err}");
    }
    let out = ctasim(&["sweep", "--sensitivity", "nonsense", "--agents", "2000"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ctasim(&["run", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}
