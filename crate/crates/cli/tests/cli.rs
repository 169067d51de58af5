use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mubforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mubforge")).args(args).env_remove("MUBFORGE_THREADS").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mubs_writes_complete_families() {
    let dir = tempfile::tempdir().unwrap();
    for (d, n) in [(4usize, 5u64), (5, 6)] {
        let f = dir.path().join(format!("m{d}.json"));
        let out = mubforge(&["mubs", "--d", &d.to_string(), "--out", path_arg(&f)]);
        assert!(out.status.success());
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(doc["command"], "mubs");
        assert_eq!(doc["result"]["n"].as_u64(), Some(n));
        let m = json_of(&mubforge(&["measure", "--bases", path_arg(&f)]));
        let q = m["result"]["summary"]["qbar"].as_f64().unwrap();
        let dsq = m["result"]["summary"]["dbar_sq"].as_f64().unwrap();
        assert!((q - 1.0).abs() < 1e-10 && (dsq - 1.0).abs() < 1e-10);
        for p in m["result"]["pairs"].as_array().unwrap() {
            assert!(p["max_unbiasedness_deviation"].as_f64().unwrap() < 1e-10);
        }
    }
}

#[test]
fn unsupported_dimension_is_an_input_error() {
    let out = mubforge(&["mubs", "--d", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime power"));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(mubforge(&["measure", "--bases", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(mubforge(&["plan", "--n", "1", "--d", "3"]).status.code(), Some(2));
    assert_eq!(mubforge(&["bound", "--n", "3", "--d", "2", "--level", "Q7"]).status.code(), Some(2));
    assert_eq!(mubforge(&["anomaly", "--d", "5", "--n", "9"]).status.code(), Some(2));
    assert_eq!(mubforge(&["bound", "--n", "3", "--d", "2", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(mubforge(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"d": 2, "n": 1, "bases": [[[[1,0],[0,0]],[[1,0],[0,0]]]]}"#).unwrap();
    assert_eq!(mubforge(&["measure", "--bases", path_arg(&bad)]).status.code(), Some(2));
}

#[test]
fn duplicated_basis_has_zero_qbar() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("dup.json");
    let v = std::f64::consts::FRAC_1_SQRT_2;
    let basis = format!("[[[{v},0],[{v},0]],[[{v},0],[-{v},0]]]");
    std::fs::write(&f, format!(r#"{{"d": 2, "n": 2, "bases": [{basis},{basis}]}}"#)).unwrap();
    let m = json_of(&mubforge(&["measure", "--bases", path_arg(&f)]));
    assert!(m["result"]["summary"]["qbar"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn anomaly_bins_in_dimension_five() {
    let out = mubforge(&["anomaly", "--d", "5", "--n", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows, ["value,count", "0.610855,10", "0.596449,10"]);
}

#[test]
fn bound_matches_known_value() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("lmi.txt");
    let r = json_of(&mubforge(&["bound", "--n", "4", "--d", "3", "--level", "Q1", "--dump", path_arg(&dump)]));
    let q = r["result"]["qbar_bound"].as_f64().unwrap();
    assert!((q - 1.13165).abs() < 1e-4, "{q}");
    assert_eq!(r["result"]["span_dim"].as_u64(), Some(7));
    assert_eq!(r["result"]["excluded"], false);
    assert!(std::fs::read_to_string(&dump).unwrap().starts_with("lmi 1 7 1"));
}

#[test]
fn plan_counts() {
    let r = json_of(&mubforge(&["plan", "--n", "4", "--d", "6", "--k", "1"]));
    assert_eq!(r["result"]["a_plus_b"], "240");
    assert_eq!(r["result"]["word_count"], "241");
}

#[test]
fn reruns_are_byte_identical_apart_from_timing() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_mubforge"))
            .args(["mc", "--n", "3", "--d", "3", "--count", "40", "--seed", "9"])
            .env("MUBFORGE_THREADS", threads)
            .output()
            .unwrap();
        let mut v = json_of(&out);
        v.as_object_mut().unwrap().remove("timing");
        v["config"].as_object_mut().unwrap().remove("threads");
        serde_json::to_string(&v).unwrap()
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("2"));
    let csv = |seed: &str| mubforge(&["mc", "--n", "3", "--d", "3", "--count", "5", "--seed", seed, "--format", "csv"]).stdout;
    assert_eq!(csv("4"), csv("4"));
    assert_ne!(csv("4"), csv("5"));
}

#[test]
fn monte_carlo_grid_and_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let r = json_of(&mubforge(&["mc", "--n", "3", "--d", "3", "--count", "200", "--bins", "10", "--grid", path_arg(&grid)]));
    let rho = r["result"]["spearman"].as_f64().unwrap();
    assert!(rho > 0.0 && rho <= 1.0);
    assert_eq!(r["result"]["samples"].as_array().unwrap().len(), 200);
    let text = std::fs::read_to_string(&grid).unwrap();
    let mass: f64 = text
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1).map(|x| x.parse::<f64>().unwrap()))
        .sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn seesaw_output_feeds_measure() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("ss.json");
    let out = mubforge(&["seesaw", "--n", "3", "--d", "2", "--seeds", "3", "--rounds", "200", "--out", path_arg(&f)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert!(doc["result"]["qbar"].as_f64().unwrap() > 0.99999);
    let m = json_of(&mubforge(&["measure", "--bases", path_arg(&f)]));
    assert!((m["result"]["summary"]["qbar"].as_f64().unwrap() - doc["result"]["qbar"].as_f64().unwrap()).abs() < 1e-12);
    let q = json_of(&mubforge(&["qrac", "--bases", path_arg(&f), "--m", "2"]));
    assert!((q["result"]["value"].as_f64().unwrap() - doc["result"]["pbar"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn seesaw_round_cap_exits_one() {
    let out = mubforge(&["seesaw", "--n", "4", "--d", "3", "--seeds", "1", "--rounds", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("round,pbar\n"));
    assert_eq!(text.lines().count(), 3);
}
