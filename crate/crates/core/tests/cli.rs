use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twodomain")).args(args).output().expect("binary runs")
}

/// The gap document on a coarse grid.
fn coarse_gap(dir: &Path) -> PathBuf {
    gap_with_spacing(dir, 0.05)
}

fn gap_with_spacing(dir: &Path, dx: f64) -> PathBuf {
    let text = std::fs::read_to_string(configs().join("gap.toml"))
        .unwrap()
        .replace("dx = 0.005", &format!("dx = {dx}"));
    let path = dir.join("gap.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn audit_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = coarse_gap(dir.path());
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "audit"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("audit.json"));
    assert_eq!(report["coercivity"]["violations"], 0);
    assert_eq!(report["bounds"]["passed"], true);
    assert!(!out.join("failure.json").exists());
}

#[test]
fn solve_writes_field_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = coarse_gap(dir.path());
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "solve-plus"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("value_plus.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x1,t,value"));
    let meta = json(&out.join("value_plus.json"));
    let steps = meta["steps"].as_u64().unwrap() as usize;
    assert_eq!(lines.count(), 81 * (steps + 1));
    // U+(0, T) = T on the gap problem
    let last = csv.lines().filter(|l| l.starts_with("0,1,")).last().unwrap();
    let v: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-9);
}

#[test]
fn verify_reports_ordering_and_gap_profile() {
    let dir = tempfile::tempdir().unwrap();
    // fine enough for the kink detector to separate slope jumps of 1
    let config = gap_with_spacing(dir.path(), 0.01);
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("verify.json"));
    assert_eq!(report["comparison"]["violations"], 0);
    let gap = report["comparison"]["max_gap"].as_f64().unwrap();
    assert!((gap - 1.0).abs() < 1e-9, "{gap}");
    let profile = std::fs::read_to_string(out.join("gap_profile.csv")).unwrap();
    assert!(profile.starts_with("x1,gap\n"));
}

#[test]
fn oracle_and_trajectory_commands() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(coarse_gap(dir.path())).unwrap().replace(
        "stride = 5",
        "stride = 5\nmode = \"regular-only\"\nschedule = [{ alpha1 = 20, alpha2 = 0, mu = 0.5 }, { alpha1 = 0, alpha2 = 20, mu = 0.5 }]",
    );
    let config = dir.path().join("run.toml");
    std::fs::write(&config, text).unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let oracle = json(&out.join("oracle.json"));
    assert!((oracle["best_cost"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(oracle["mode"], "regular-only");

    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "trajectory"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&out.join("trajectory.json"));
    // singular sliding for half the horizon, then pushed toward H from both sides
    assert_eq!(summary["has_singular"], true);
    assert!(std::fs::read_to_string(out.join("trajectory.csv")).unwrap().starts_with("s,x1,region,"));
}

#[test]
fn unknown_family_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("gap.toml"))
        .unwrap()
        .replacen("family = \"gap-demo\" }", "family = \"spline\" }", 1);
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, text).unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let failure = json(&out.join("failure.json"));
    assert_eq!(failure["kind"], "config");
    assert_eq!(failure["exit_code"], 2);
    assert!(failure["location"].as_str().unwrap().starts_with("line "));
    assert!(failure["message"].as_str().unwrap().contains("spline"));
}

#[test]
fn failed_check_exits_one_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    // declared bounds smaller than the true speed
    let text = std::fs::read_to_string(coarse_gap(dir.path()))
        .unwrap()
        .replacen("speed = 1.0,", "speed = 0.5,", 1);
    let config = dir.path().join("bad_bounds.toml");
    std::fs::write(&config, text).unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "audit"]);
    assert_eq!(o.status.code(), Some(1));
    let failure = json(&out.join("failure.json"));
    assert_eq!(failure["kind"], "check-failure");
    assert!(failure["failed_checks"].as_array().unwrap().iter().any(|c| c == "bounds"));
}

#[test]
fn missing_run_parameters_and_unknown_commands() {
    let dir = tempfile::tempdir().unwrap();
    let config = coarse_gap(dir.path());
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "trajectory"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&out.join("failure.json"))["location"], "run.schedule");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "plot"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_errors_report_requirement() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(coarse_gap(dir.path()))
        .unwrap()
        .replace("intervals = 4", "intervals = 5");
    let config = dir.path().join("big.toml");
    std::fs::write(&config, text).unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "oracle"]);
    assert_eq!(o.status.code(), Some(1));
    let failure = json(&out.join("failure.json"));
    assert_eq!(failure["kind"], "budget-exceeded");
    assert!(failure["message"].as_str().unwrap().contains("14348907"));
}

#[test]
fn seed_override_changes_sampled_reports_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = coarse_gap(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (out, seed) in [(&a, "1"), (&b, "1"), (&c, "2")] {
        let o = run(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--command", "audit", "--seed", seed]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &Path| std::fs::read(d.join("audit.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}
