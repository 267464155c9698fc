// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end checks of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_heavytail-cpt");

const MINIMAL: &str = r#"
[run]
seed = 11
[data]
p = 10
n = 64
[test]
id = "dense-G"
[noise]
family = "gaussian"
alpha = 2.0
[power]
t0 = 32
s = 10
rho_max = 12.0
points = 4
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn data_csv(p: usize, n: usize, value: impl Fn(usize, usize) -> f64) -> String {
    let mut s = (1..=n).map(|t| format!("t{t}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for j in 0..p {
        s.push_str(&(0..n).map(|t| value(j, t).to_string()).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn out_dir(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn calibrate_writes_two_files_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", MINIMAL);
    let (a, b) = (out_dir(dir.path(), "a"), out_dir(dir.path(), "b"));
    for out in [&a, &b] {
        let o = run(&["calibrate", "--config", &cfg, "--out", out, "--reps", "300"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut files: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert_eq!(files, ["calibration.csv", "calibration.manifest.json"]);
    let csv_a = std::fs::read(Path::new(&a).join("calibration.csv")).unwrap();
    let csv_b = std::fs::read(Path::new(&b).join("calibration.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    assert!(String::from_utf8(csv_a)
        .unwrap()
        .starts_with("test,eps,threshold_id,value\n"));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(Path::new(&a).join("calibration.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["output_file"], "calibration.csv");
    assert_eq!(manifest["input_hashes"][0][1].as_str().unwrap().len(), 64);
}

#[test]
fn seed_flag_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", MINIMAL);
    let (a, b) = (out_dir(dir.path(), "a"), out_dir(dir.path(), "b"));
    run(&["calibrate", "--config", &cfg, "--out", &a, "--reps", "300"]);
    run(&[
        "calibrate",
        "--config",
        &cfg,
        "--out",
        &b,
        "--reps",
        "300",
        "--seed",
        "12",
    ]);
    let csv_a = std::fs::read(Path::new(&a).join("calibration.csv")).unwrap();
    let csv_b = std::fs::read(Path::new(&b).join("calibration.csv")).unwrap();
    assert_ne!(csv_a, csv_b);
}

#[test]
fn missing_field_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[data]\np = 10\n[test]\nid = \"dense-G\"\n");
    let o = run(&["calibrate", "--config", &cfg, "--out", &out_dir(dir.path(), "o")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`n`"));
    let cfg = write(
        dir.path(),
        "d.toml",
        "[data]\np = 10\nn = 64\n[test]\nid = \"dense-G\"\n",
    );
    let o = run(&["calibrate", "--config", &cfg, "--out", &out_dir(dir.path(), "o")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[noise]"));
}

#[test]
fn degenerate_calibration_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &MINIMAL.replace("\"gaussian\"", "\"zero\""));
    let o = run(&[
        "calibrate",
        "--config",
        &cfg,
        "--out",
        &out_dir(dir.path(), "o"),
        "--reps",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn test_command_accepts_constant_and_rejects_jump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("{MINIMAL}\n[calibration]\nmultiplier = 2.5\n"),
    );
    let out = out_dir(dir.path(), "o");
    let constant = write(dir.path(), "const.csv", &data_csv(10, 64, |_, _| 3.25));
    let o = run(&["test", "--config", &cfg, "--data", &constant, "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let d: serde_json::Value =
        serde_json::from_slice(&std::fs::read(Path::new(&out).join("decision.json")).unwrap()).unwrap();
    assert_eq!(d["reject"], false);
    assert!(d["entries"].as_array().unwrap().len() >= 5);
    assert!(Path::new(&out).join("decision.manifest.json").exists());

    let jump = write(
        dir.path(),
        "jump.csv",
        &data_csv(10, 64, |_, t| if t < 32 { 0.0 } else { 50.0 }),
    );
    let o = run(&["test", "--config", &cfg, "--data", &jump, "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let d: serde_json::Value =
        serde_json::from_slice(&std::fs::read(Path::new(&out).join("decision.json")).unwrap()).unwrap();
    assert_eq!(d["reject"], true);
}

#[test]
fn test_command_data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("{MINIMAL}\n[calibration]\nmultiplier = 2.5\n"),
    );
    let out = out_dir(dir.path(), "o");
    let text = data_csv(10, 64, |_, _| 0.0);
    let mut broken: Vec<String> = text.lines().map(str::to_string).collect();
    broken[4] = broken[4].replacen('0', "abc", 1);
    let bad = write(dir.path(), "bad.csv", &(broken.join("\n") + "\n"));
    let o = run(&["test", "--config", &cfg, "--data", &bad, "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("row 4"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let small = write(dir.path(), "small.csv", &data_csv(9, 64, |_, _| 0.0));
    let o = run(&["test", "--config", &cfg, "--data", &small, "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn phase_diagram_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(dir.path(), "o");
    let o = run(&[
        "phase-diagram",
        "--alpha-min",
        "2",
        "--alpha-max",
        "10",
        "--step",
        "0.5",
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(Path::new(&out).join("curves.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("alpha,curve_id,value"));
    assert_eq!(text.lines().filter(|l| l.contains(",gamma,")).count(), 17);
    assert!(text.lines().any(|l| l == "4,gamma,0.5"));
    assert!(text.lines().any(|l| l == "2,beta,1"));
}

#[test]
fn power_smoke_determinism_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", MINIMAL);
    let (a, b) = (out_dir(dir.path(), "a"), out_dir(dir.path(), "b"));
    for out in [&a, &b] {
        let o = run(&["power", "--config", &cfg, "--out", out, "--reps", "200"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let pa = std::fs::read_to_string(Path::new(&a).join("power.csv")).unwrap();
    assert_eq!(pa, std::fs::read_to_string(Path::new(&b).join("power.csv")).unwrap());
    assert_eq!(pa.lines().next(), Some("rho,power,se"));
    assert_eq!(pa.lines().count(), 5);

    let cfg = write(dir.path(), "d.toml", &MINIMAL.replace("t0 = 32\n", ""));
    let o = run(&["power", "--config", &cfg, "--out", &a]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`t0`"));
}

#[test]
fn risk_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("{MINIMAL}\n[alt]\nt0 = 32\ns = 2\nrho = 10.0\n"),
    );
    let out = out_dir(dir.path(), "o");
    let o = run(&["risk", "--config", &cfg, "--out", &out, "--reps", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(Path::new(&out).join("risk.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("type1,type2,total,se1,se2,R"));
}
