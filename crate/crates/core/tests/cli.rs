use std::path::Path;
use std::process::Command;

use clap::Parser;
use dtc_core::cli::{execute, parse_plan, preset, Cli, Scale};

const PLAN: &str = r#"{
  "name": "small",
  "D": 1, "L": 24, "alpha": 1.5, "T": 2.5, "g": 0.25, "h": 0.1, "W": 0.1,
  "n_periods": 200, "M": 200, "R": 3,
  "axes": [{"param": "g", "values": [0.24, 0.26]}],
  "observables": ["magnetization", "decorrelator", "order_parameter", "timescales"]
}"#;

fn run(args: &[&str]) -> String {
    let cli = Cli::try_parse_from(std::iter::once("dtc").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    execute(cli, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

fn write_plan(dir: &Path, body: &str) -> String {
    let path = dir.join("plan.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn run_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), PLAN);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&["run", &plan, "--out", a.to_str().unwrap(), "--threads", "1"]);
    run(&["run", &plan, "--out", b.to_str().unwrap(), "--threads", "3"]);
    let fa = read_dir_sorted(&a);
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for want in ["manifest.json", "order_parameter.csv", "order_parameter_raw.csv", "tau_pth.csv", "series_magnetization.csv", "series_decorrelator.csv"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    assert_eq!(fa, read_dir_sorted(&b));
}

#[test]
fn order_parameter_table_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), PLAN);
    let out = dir.path().join("out");
    let log = run(&["run", &plan, "--out", out.to_str().unwrap()]);
    assert!(log.contains("g=0.24") && log.contains("g=0.26"), "{log}");

    let mut rdr = csv::Reader::from_path(out.join("order_parameter.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["g", "order_parameter_mean", "order_parameter_std", "R_effective"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    for (row, g) in rows.iter().zip([0.24, 0.26]) {
        assert_eq!(row[0].parse::<f64>().unwrap(), g);
        let op: f64 = row[1].parse().unwrap();
        assert!((0.0..=2.0).contains(&op));
        assert_eq!(&row[3], "3");
    }

    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["grid_points"], 2);
    assert_eq!(manifest["realizations"], 3);
    assert_eq!(manifest["plan"]["L"], 24);
}

#[test]
fn seed_flag_overrides_the_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), PLAN);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&["run", &plan, "--out", a.to_str().unwrap()]);
    run(&["run", &plan, "--out", b.to_str().unwrap(), "--seed", "99"]);
    let raw = |d: &Path| std::fs::read_to_string(d.join("order_parameter_raw.csv")).unwrap();
    assert_ne!(raw(&a), raw(&b));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
}

#[test]
fn preset_print_writes_parseable_plans() {
    let dir = tempfile::tempdir().unwrap();
    let log = run(&["preset", "fig6", "--scale", "paper", "--print", "--out", dir.path().to_str().unwrap()]);
    let expected = preset("fig6", Scale::Paper).unwrap();
    assert_eq!(log.lines().count(), expected.len());
    for (name, plan) in expected {
        let parsed = parse_plan(&dir.path().join(format!("{name}.json"))).unwrap();
        assert_eq!(parsed, plan, "{name}");
    }
}

#[test]
fn snapshot_writes_frames_and_a_spacetime_image() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), PLAN);
    let out = dir.path().join("snap");
    run(&["snapshot", &plan, "--periods", "0,5,10", "--pixel", "2", "--out", out.to_str().unwrap()]);
    for n in [0, 5, 10] {
        assert!(out.join(format!("snapshot_{n}.png")).is_file());
        let csv = std::fs::read_to_string(out.join(format!("snapshot_{n}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 25, "header plus one line per site");
    }
    let png = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(out.join("spacetime.png")).unwrap()))
        .read_info()
        .unwrap();
    assert_eq!((png.info().width, png.info().height), (48, 6));
}

#[test]
fn binary_reports_every_plan_issue_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(
        dir.path(),
        r#"{"D": 4, "L": 10, "alpha": 1.5, "T": 2.5, "g": 0.25, "h": 0.1, "n_periods": 10, "R": 0}"#,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_dtc")).args(["run", &plan]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error:"), "{stderr}");
    for path in ["  R:", "  M:", "  D:"] {
        assert!(stderr.contains(path), "{path} missing: {stderr}");
    }
}

#[test]
fn binary_lists_presets() {
    let out = Command::new(env!("CARGO_BIN_EXE_dtc")).arg("presets").output().unwrap();
    assert!(out.status.success());
    let ids: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(ids.len(), 10);
    assert_eq!(ids.first().map(String::as_str), Some("fig2"));
}
