use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use vortex_cli::{RunConfig, OUTPUT_ENV};

fn vortex(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vortex"))
        .args(args)
        .current_dir(dir)
        .env_remove(OUTPUT_ENV)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const PAIR: &str = r#"{
  "domain": {"shape": "disc"},
  "gamma": [1, -1],
  "positions": [[0.35, 0.0], [-0.35, 0.0]],
  "seed": 4,
  "dynamics": {"dt": 1e-3, "t_final": 0.5, "record_every": 50},
  "desing": {"eps": [0.1], "h": 0.03125, "fields": true},
  "output": "out"
}"#;

#[test]
fn check_reports_the_applicable_theorem() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", r#"{"domain": {"shape": "disc"}, "gamma": [1, -1, 1, -1]}"#);
    let o = vortex(d.path(), &["check", "c.json"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("N4 applicable"));
    let report = fs::read_to_string(d.path().join("out/check.json")).unwrap();
    assert!(report.contains("\"applicable\": \"N4\""));

    write(d.path(), "same.json", r#"{"domain": {"shape": "disc"}, "gamma": [1, 1]}"#);
    assert_eq!(code(&vortex(d.path(), &["check", "same.json"])), 1);
    write(d.path(), "five.json", r#"{"domain": {"shape": "disc"}, "gamma": [1, -1, 1, -1, 1]}"#);
    assert_eq!(code(&vortex(d.path(), &["check", "five.json"])), 1);
}

#[test]
fn schema_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"domain": {"shape": "disc"}, "gamma": [1, -1], "extra": 0}"#,
        r#"{"domain": {"shape": "disc", "radius": 2}, "gamma": [1, -1]}"#,
        r#"{"domain": {"shape": "square"}, "gamma": [1, -1]}"#,
        r#"{"domain": {"shape": "disc"}, "gamma": [1, 0]}"#,
        r#"{"domain": {"shape": "disc"}, "gamma": [1, -1], "dynamics": {"dt": -1}}"#,
        r#"{"domain": {"shape": "disc"}, "gamma": [1, -1], "desing": {"eps": [2.0]}}"#,
        r#"{"domain": {"shape": "disc"}, "gamma": [1, -1], "positions": [[0.1, 0.0]]}"#,
        r#"{"domain": {"shape": "disc"}, "backend": {"kind": "annulus"}, "gamma": [1, -1]}"#,
        r#"{"domain": {"shape": "annulus", "inner_radius": 1.5}, "gamma": [1, -1]}"#,
        r#"{"domain": {"shape": "boundary_file", "path": "missing.txt"}, "gamma": [1, -1]}"#,
        "not json",
    ];
    for (k, c) in cases.iter().enumerate() {
        write(d.path(), "c.json", c);
        assert_eq!(code(&vortex(d.path(), &["check", "c.json"])), 2, "case {k}");
    }
    assert_eq!(code(&vortex(d.path(), &["check", "absent.json"])), 2);
    assert_eq!(code(&vortex(d.path(), &["frobnicate", "c.json"])), 2);
    assert_eq!(code(&vortex(d.path(), &["--help"])), 0);
    write(d.path(), "nopos.json", r#"{"domain": {"shape": "disc"}, "gamma": [1, -1]}"#);
    assert_eq!(code(&vortex(d.path(), &["simulate", "nopos.json"])), 2);
}

#[test]
fn computation_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "c.json",
        r#"{"domain": {"shape": "disc"}, "gamma": [1, -1], "positions": [[0.1, 0.0], [1.5, 0.0]]}"#,
    );
    assert_eq!(code(&vortex(d.path(), &["simulate", "c.json"])), 1);
}

fn numeric_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_writes_a_deterministic_trajectory() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", PAIR);
    assert_eq!(code(&vortex(d.path(), &["simulate", "c.json"])), 0);
    let first = fs::read(d.path().join("out/trajectory.csv")).unwrap();
    assert_eq!(code(&vortex(d.path(), &["simulate", "c.json"])), 0);
    assert_eq!(first, fs::read(d.path().join("out/trajectory.csv")).unwrap());

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    let hash = RunConfig::parse(PAIR).unwrap().hash();
    assert_eq!(lines.next().unwrap(), format!("# config_sha256={hash} seed=4"));
    assert_eq!(lines.next().unwrap(), "t,x1x,x1y,x2x,x2y,H");
    let rows = numeric_rows(&text);
    assert_eq!(rows.len(), 11);
    for cell in rows.iter().flatten() {
        let x: f64 = cell.parse().unwrap();
        assert_eq!(&format!("{x:.16e}"), cell);
        let mantissa = cell.split('e').next().unwrap().replace(['-', '.'], "");
        assert_eq!(mantissa.len(), 17);
    }
    let h: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(h.iter().all(|v| ((v - h[0]) / h[0]).abs() < 1e-8));
}

#[test]
fn output_directory_can_be_overridden() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", PAIR);
    let o = Command::new(env!("CARGO_BIN_EXE_vortex"))
        .args(["green", "c.json"])
        .current_dir(d.path())
        .env(OUTPUT_ENV, d.path().join("elsewhere"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(d.path().join("elsewhere/green.csv").exists());
    assert!(!d.path().join("out").exists());
    let green = fs::read_to_string(d.path().join("elsewhere/green.csv")).unwrap();
    // 16 samples, ordered pairs
    assert_eq!(numeric_rows(&green).len(), 16 * 15);
    let robin = fs::read_to_string(d.path().join("elsewhere/robin.csv")).unwrap();
    for row in numeric_rows(&robin) {
        let v: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        let exact = (1.0 - v[0] * v[0] - v[1] * v[1]).ln() / (2.0 * std::f64::consts::PI);
        assert!((v[2] - exact).abs() < 1e-14);
    }
}

#[test]
fn configuration_hash_ignores_layout_but_not_content() {
    let a = RunConfig::parse(PAIR).unwrap();
    let b = RunConfig::parse(&PAIR.replace('\n', " ")).unwrap();
    assert_eq!(a.hash(), b.hash());
    let c = RunConfig::parse(&PAIR.replace("\"seed\": 4", "\"seed\": 5")).unwrap();
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn equilibrium_and_desingularization_records() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", &PAIR.replace("\"positions\": [[0.35, 0.0], [-0.35, 0.0]],", ""));
    assert_eq!(code(&vortex(d.path(), &["equilibrium", "c.json"])), 0);
    let eq: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/equilibrium.json")).unwrap()).unwrap();
    assert_eq!(eq["seed"], 4);
    let r = &eq["results"][0];
    assert!(r["residual"].as_f64().unwrap() < 1e-10);
    let x = r["positions"][0][0].as_f64().unwrap().hypot(r["positions"][0][1].as_f64().unwrap());
    assert!((x * x - (5f64.sqrt() - 2.0)).abs() < 1e-9);

    assert_eq!(code(&vortex(d.path(), &["desingularize", "c.json"])), 0);
    let ds: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/desing.json")).unwrap()).unwrap();
    let sol = &ds["solutions"][0];
    assert_eq!(sol["blobs"].as_array().unwrap().len(), 2);
    assert_eq!(sol["separated"], true);
    let fields = fs::read_to_string(d.path().join("out/fields_0.csv")).unwrap();
    assert_eq!(fields.lines().nth(1).unwrap(), "x,y,psi,omega");
    assert_eq!(numeric_rows(&fields).len(), sol["nodes"].as_u64().unwrap() as usize);
}

#[test]
fn three_vortex_equilibrium_on_a_polygon_file() {
    let d = tempfile::tempdir().unwrap();
    let boundary: String = (0..96)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 96.0;
            format!("{} {}\n", 1.2 * t.cos(), 0.9 * t.sin())
        })
        .collect();
    write(d.path(), "ellipse.txt", &format!("# ellipse\n{boundary}"));
    write(
        d.path(),
        "c.json",
        r#"{"domain": {"shape": "boundary_file", "path": "ellipse.txt"}, "gamma": [1, -1, 1],
            "validate": {"contract_samples": 100, "configurations": 20}}"#,
    );
    assert_eq!(code(&vortex(d.path(), &["validate", "c.json"])), 0);
    write(d.path(), "bad.txt", "0 0\n1 0\nfoo bar\n");
    write(d.path(), "b.json", r#"{"domain": {"shape": "boundary_file", "path": "bad.txt"}, "gamma": [1, -1]}"#);
    assert_eq!(code(&vortex(d.path(), &["check", "b.json"])), 2);
}

#[test]
fn validate_on_the_disc_is_quick() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", r#"{"domain": {"shape": "disc"}, "gamma": [1, -1, 1]}"#);
    let t = Instant::now();
    assert_eq!(code(&vortex(d.path(), &["validate", "c.json"])), 0);
    assert!(t.elapsed().as_secs() < 60);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/validate.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 9);
}
