//! End-to-end runs of the scenario driver and the binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use spraylab::cli::{run, ExitStatus, ScenarioConfig};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&configs_dir().join(name)).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spraylab"))
}

#[test]
fn every_shipped_config_passes_and_is_deterministic() {
    let mut names: Vec<_> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".toml"))
        .collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        let mut cfg = load(&name);
        cfg.num_samples = cfg.num_samples.min(20);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.status, ExitStatus::Pass, "{name}\n{}", a.summary);
        assert_eq!(a.ndjson, b.ndjson, "{name} is not deterministic");
        assert_eq!(a.csv, b.csv);
    }
}

#[test]
fn golden_report() {
    let mut cfg = load("klein_family.toml");
    cfg.num_samples = 5;
    let out = run(&cfg).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/klein_family_5.ndjson");
    let expected = std::fs::read_to_string(&golden).unwrap();
    assert_eq!(out.ndjson, expected);
}

#[test]
fn records_name_their_thresholds() {
    let out = run(&load("funk.toml")).unwrap();
    let lines: Vec<serde_json::Value> = out
        .ndjson
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 101);
    for rec in &lines[..100] {
        assert_eq!(rec["record"], "sample");
        assert_eq!(rec["seed"], 9);
        for c in rec["checks"].as_array().unwrap() {
            assert!(c["threshold"].is_f64() && c["name"].is_string() && c["pass"].is_boolean());
        }
    }
    let agg = &lines[100];
    assert_eq!(agg["record"], "aggregate");
    assert_eq!(agg["verdict"], "ALL_CHECKS_PASS");
    assert_eq!(agg["accepted"], 100);
}

#[test]
fn seed_changes_the_samples() {
    let mut cfg = load("klein_family.toml");
    cfg.num_samples = 3;
    let a = run(&cfg).unwrap().ndjson;
    cfg.seed += 1;
    assert_ne!(a, run(&cfg).unwrap().ndjson);
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const KLEIN: &str = "scenario = \"verify-family\"\ndimension = 2\nnum_samples = 10\n\
[coefficients]\nc_matrix = [1.0, 0.0, 0.0, 1.0]\nc_vector = [0.0, 0.0]\nc_scalar = 1.0\n";

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), "ok.toml", KLEIN);
    let out = bin().arg(&ok).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 11);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("METRIZABLE_CFC"));

    let wrong = write_config(
        dir.path(),
        "wrong.toml",
        &format!("{KLEIN}[expect]\nverdict = \"FAILS_III\"\n"),
    );
    assert_eq!(bin().arg(&wrong).output().unwrap().status.code(), Some(1));

    let empty = write_config(
        dir.path(),
        "empty.toml",
        &format!("{KLEIN}[sample_box]\nx_intervals = [[0.5, 0.5], [0.0, 1.0]]\n"),
    );
    let out = bin().arg(&empty).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("empty or degenerate"));

    assert_eq!(
        bin()
            .arg(dir.path().join("missing.toml"))
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );

    // The planar member lives on a cone of directions; uniform directions
    // lose more than half the draws.
    let cone = write_config(
        dir.path(),
        "cone.toml",
        "scenario = \"affine\"\ndimension = 2\nnum_samples = 20\n\
         [coefficients]\nc_matrix = [0.0, 1.0, 1.0, 0.0]\nc_vector = [1.0, 1.0]\nc_scalar = 1.0\n",
    );
    assert_eq!(bin().arg(&cone).output().unwrap().status.code(), Some(3));
}

#[test]
fn overrides_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k.toml", KLEIN);
    let report = dir.path().join("report.ndjson");
    let out = bin()
        .arg(&cfg)
        .args(["--seed", "42", "--samples", "4", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("seed 42"));
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.contains("\"seed\":42")));
}

#[test]
fn geodesic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    let cfg = write_config(
        dir.path(),
        "flat.toml",
        &format!(
            "scenario = \"geodesics\"\ndimension = 2\nnum_samples = 1\n\
             [spray]\nkind = \"flat\"\n[geodesics]\nsteps = 50\ncsv_path = {:?}\n",
            csv.to_str().unwrap()
        ),
    );
    let out = bin().arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("trajectory_id,t,x1,x2,y1,y2,collinearity_defect")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 51);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 7);
        // 17 significant digits: d.dddddddddddddddde±x
        let mantissa = cols[1].split('e').next().unwrap();
        assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{}", cols[1]);
        assert!(cols[6].parse::<f64>().unwrap() <= 1e-12);
    }
}

#[test]
fn bending_geodesics_are_flagged() {
    let out = run(&load("example1_geodesics.toml")).unwrap();
    assert_eq!(out.aggregate.verdict, "NOT_STRAIGHT");
    let worst = out.aggregate.info["max_collinearity_defect"]
        .as_f64()
        .unwrap();
    assert!(worst > 1e-3, "{worst}");
}
