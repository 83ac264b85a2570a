use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn masec() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_masec"));
    c.env_remove("MASEC_OUT_DIR");
    c
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn repeated_runs_write_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = shipped("interval_quadratic.json");
    let mut reports = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let o = masec().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
        assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
        for f in ["report.json", "report.md", "timings.json", "volume_growth.csv", "overlap_profile.csv", "superlevel.csv", "doubling.csv"] {
            assert!(out.join(f).is_file(), "missing {f}");
        }
        reports.push(fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let v: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 11);
}

#[test]
fn output_directory_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema": 1, "instance": {"name": "interval_quadratic"}, "seed": 3, "checks": {"volume_growth": {}}}"#,
    );
    let env_dir = tmp.path().join("from-env");
    let o = masec().args(["run", "--config"]).arg(&cfg).env("MASEC_OUT_DIR", &env_dir).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(env_dir.join("report.json").is_file());
    let flag_dir = tmp.path().join("from-flag");
    let o = masec()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag_dir)
        .env("MASEC_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(flag_dir.join("report.json").is_file());
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema": 1, "instance": {"name": "interval_quadratic"}, "seed": 3, "checks": {"volume_growth": {}}}"#,
    );
    let out = tmp.path().join("o");
    let o = masec().args(["run", "--seed", "99", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 99);
}

#[test]
fn bad_configs_exit_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"schema": 1, "instance": {"name": "quadratic_ball"}, "seed": 1, "checks": {"volume_growth": {"budget": -5}}}"#,
        r#"{"schema": 1, "instance": {"name": "quadratic_ball"}, "seed": 1, "checks": {"covering_theorem": {"eps": 1.0}}}"#,
        r#"{"schema": 1, "instance": {"name": "quadratic_ball"}, "seed": 1, "checks": {"volume_grwth": {}}}"#,
        r#"{"schema": 1, "instance": {"name": "cubic_ball"}, "seed": 1, "checks": {}}"#,
        r#"{"schema": 2, "instance": {"name": "quadratic_ball"}, "seed": 1, "checks": {}}"#,
        r#"{"schema": 1, "instance": {"name": "quadratic_ball"}, "checks": {}}"#,
    ];
    for text in cases {
        let cfg = write_config(tmp.path(), text);
        let o = masec().args(["run", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("o")).output().unwrap();
        assert_eq!(code(&o), 2, "{text}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = masec().args(["run", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn cover_rejects_ratio_outside_unit_interval() {
    for eps in ["1", "0", "-0.5", "1.5"] {
        let o = masec().args(["cover", "--eps", eps]).output().unwrap();
        assert_eq!(code(&o), 2, "ε = {eps}");
    }
}

#[test]
fn cover_reports_the_disc_example() {
    let o = masec().args(["cover", "--eps", "0.25", "--radius", "0.1", "--centers", "8"]).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["slack"].as_f64().unwrap() >= 0.0);
}

#[test]
fn describe_check_knows_every_check() {
    for name in masec::runner::catalog::names() {
        let o = masec().args(["describe-check", name]).output().unwrap();
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).starts_with(name));
    }
    let o = masec().args(["describe-check", "bogus"]).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("covering_lemma"));
}

#[test]
fn list_instances_shows_constants() {
    let o = masec().arg("list-instances").output().unwrap();
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("quadratic_ball (ρ=1, λ=Λ=4, n=2)"), "{s}");
    for name in ["ellipse_quadratic", "quartic_ball", "interval_quadratic"] {
        assert!(s.contains(name));
    }
}

#[test]
fn quasi_distance_prints_squared_distance() {
    let o = masec().args(["quasi-distance", "--x", "0,0", "--y", "0.3,0.4"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let d: f64 = stdout(&o).trim().parse().unwrap();
    assert!((d - 0.25).abs() < 1e-15);
    let o = masec().args(["quasi-distance", "--tilt", "2,-1", "--x", "0,0", "--y", "0.3,0.4"]).output().unwrap();
    let dt: f64 = stdout(&o).trim().parse().unwrap();
    assert!((dt - d).abs() < 1e-14);
    let o = masec().args(["quasi-distance", "--x", "0", "--y", "0.3,0.4"]).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = masec().args(["quasi-distance", "--x", "0,a", "--y", "0.3,0.4"]).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn volume_matches_boundary_lens() {
    let o = masec().args(["volume", "--center", "1,0", "--height", "0.01"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (vol, se) = (v["volume"].as_f64().unwrap(), v["stderr"].as_f64().unwrap());
    // lens of the unit disc and the disc of radius 0.1 about (1, 0)
    let (r, d) = (0.1f64, 1.0f64);
    let a1 = ((d * d + 1.0 - r * r) / (2.0 * d)).acos();
    let a2 = ((d * d + r * r - 1.0) / (2.0 * d * r)).acos();
    let k = ((-d + 1.0 + r) * (d + 1.0 - r) * (d - 1.0 + r) * (d + 1.0 + r)).sqrt();
    let lens = a1 + r * r * a2 - 0.5 * k;
    assert!((vol - lens).abs() <= 3.0 * se, "{vol} ± {se} vs {lens}");
    let o = masec().args(["volume", "--center", "1,0", "--height", "-1"]).output().unwrap();
    assert_eq!(code(&o), 2);
}
