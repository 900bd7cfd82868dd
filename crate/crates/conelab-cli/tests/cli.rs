use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conelab"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conelab_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn run_family_suite_writes_report() {
    let dir = temp_dir("family");
    let out = bin()
        .args(["run", "--suite", "family", "--n-points", "8", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["suite"], "family");
    assert_eq!(value["n_fail"], 0);
    assert!(value["checks"].as_array().unwrap().len() > 10);
    for check in value["checks"].as_array().unwrap() {
        assert_eq!(check["pass"], true, "failing check in report: {check}");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_file_plus_flag_overrides() {
    let dir = temp_dir("config");
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, r#"{"suite":"family","n_points":6,"seed":7}"#).unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--suite", "pseudosphere", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["suite"], "pseudosphere");
    assert_eq!(value["config"]["seed"], 7);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = bin().args(["run", "--suite", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exported_cone_geodesic_matches_radial_law() {
    let dir = temp_dir("export");
    let csv_path = dir.join("cone.csv");
    let out = bin()
        .args(["export-geodesic", "--metric", "cone-sphere", "--t-end", "0.9", "--step", "1e-3", "--out"])
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,x_0,x_1,x_2,v_0"));
    // launched along rY at r0 = 1 with alpha0 = cos²(π/4) = 1/2: the
    // radial column follows r(t) = sqrt((t/2 + 1)² + t²/4)
    let mut n = 0;
    let mut energy0 = None;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (t, r, energy) = (cols[0], cols[1], cols[7]);
        let expect = ((0.5 * t + 1.0).powi(2) + 0.25 * t * t).sqrt();
        assert!((r - expect).abs() < 1e-6, "t={t}: r={r} vs {expect}");
        let e0 = *energy0.get_or_insert(energy);
        assert!((energy - e0).abs() < 1e-9);
        n += 1;
    }
    assert_eq!(n, 901);
    let _ = std::fs::remove_dir_all(&dir);
}
