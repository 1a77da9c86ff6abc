use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hyperdyn(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hyperdyn"));
    cmd.args(args);
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn lists_every_scenario() {
    let o = hyperdyn(&["--list-scenarios"], None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["cantor", "sierpinski", "cube-root", "circle-rotation", "interval-g"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn cantor_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperdyn(&["--scenario", "cantor", "--emit", "json,csv,svg"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["attractor.json", "attractor.csv", "trajectory.csv", "attractor.svg", "stability.csv", "janos.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    assert!(!dir.path().join("attractor.pgm").exists());
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("step,residual\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("attractor.json")).unwrap()).unwrap();
    assert!(json["fixed_point_defect"].as_f64().unwrap() < 1e-3);
    assert_eq!(json["status"]["status"], "converged");
}

#[test]
fn cube_root_basin_labels_cover_all_classes() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperdyn(&["--scenario", "cube-root", "--emit", "csv"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("basin_labels.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,expected,label,steps"));
    let mut seen = [0; 3];
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], cols[2], "misclassified row {line}");
        seen[cols[1].parse::<usize>().unwrap()] += 1;
    }
    assert!(seen.iter().all(|&n| n > 0), "{seen:?}");
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"scenario\": \"cantor\",\n  \"h\": oops\n}\n").unwrap();
    let o = hyperdyn(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.json:3:"), "{}", stderr(&o));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    fs::write(&cfg, r#"{"scenario": "cantor", "tolerance": 0.1}"#).unwrap();
    let o = hyperdyn(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tolerance"));
}

#[test]
fn unknown_scenario_fails() {
    let o = hyperdyn(&["--scenario", "mandelbrot"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mandelbrot"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"scenario": "cantor", "h": 0.001, "probes": {"basins": false, "stability": false, "witness": false, "janos": false}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = hyperdyn(&["--config", cfg.to_str().unwrap(), "--h", "0.0005", "--emit", "json"], Some(&out));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("attractor.json")).unwrap()).unwrap();
    assert_eq!(json["resolution"].as_f64(), Some(0.0005));
    assert!(!out.join("stability.json").exists());
}

#[test]
fn unexpected_stability_exits_with_code_two() {
    // interval-g is expected to be unstable; a one-step horizon cannot show it
    let dir = tempfile::tempdir().unwrap();
    let o = hyperdyn(&["--scenario", "interval-g", "--horizon", "1", "--emit", "json"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn custom_map_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("custom.json");
    fs::write(
        &cfg,
        r#"{
  "custom": {
    "space": {"kind": "euclidean", "lower": [0.0], "upper": [1.0]},
    "branches": [
      {"type": "affine", "matrix": [[0.5]], "offset": [0.0]},
      {"type": "affine", "matrix": [[0.5]], "offset": [0.5]}
    ],
    "start": [[0.25]]
  },
  "h": 0.001,
  "probes": {"basins": false, "stability": false, "janos": false}
}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = hyperdyn(&["--config", cfg.to_str().unwrap(), "--emit", "json"], Some(&out));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("attractor.json")).unwrap()).unwrap();
    // the two halves tile [0,1]: the attractor must cover it up to the tolerance
    let xs: Vec<f64> = json["attractor"].as_array().unwrap().iter().map(|p| p[0].as_f64().unwrap()).collect();
    let tol = json["residual"].as_f64().unwrap().max(1e-3);
    assert!(xs[0] <= tol && 1.0 - xs[xs.len() - 1] <= tol);
    assert!(xs.windows(2).all(|w| w[1] - w[0] <= 2.0 * tol + 1e-3), "gap in attractor");
    let w: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("witness.json")).unwrap()).unwrap();
    assert!(w.is_null(), "contractions have no witness");
}
