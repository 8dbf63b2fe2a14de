use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn ellipt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellipt"))
        .args(args)
        .env_remove("ELLIPT_SEED")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn decide_two_discs() {
    let out = ellipt(&["ee", "decide", "--method", "exact", "-i", data("two_discs.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "Inside");
    assert_eq!(v["q"], 1.0);
}

#[test]
fn default_method_by_dimension() {
    let v = json(&ellipt(&["ee", "decide", "-i", data("cross.json").to_str().unwrap()]));
    assert_eq!(v["method"], "exact");
    assert_eq!(v["verdict"], "Inside");
}

#[test]
fn expect_inside_fails_on_outside() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    std::fs::write(&path, r#"{"e0":{"a":[2,0],"b":[0,2]},"p":{"dim":2,"ellipses":[{"a":[1,0],"b":[0,1]}]}}"#).unwrap();
    let out = ellipt(&["ee", "decide", "-i", path.to_str().unwrap(), "--expect-inside"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "Outside");
    assert!(v["certificate"]["margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"e0\": {\"a\": [1.0, 0.0],\n \"b\": [0.0, 1.0]\n \"p\": 3}").unwrap();
    let out = ellipt(&["ee", "decide", "-i", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:2"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ellipt(&["ee", "decide"]).status.code(), Some(2));
    let two = data("two_discs.json");
    assert_eq!(ellipt(&["ee", "decide", "-i", two.to_str().unwrap(), "-q", "1.5"]).status.code(), Some(2));
    assert_eq!(ellipt(&["ee", "decide", "-i", two.to_str().unwrap(), "-m", "magic"]).status.code(), Some(2));
}

#[test]
fn norm_of_point() {
    let path = data("point_norm.json");
    for oracle in ["lp", "socp"] {
        let v = json(&ellipt(&["ee", "norm", "-i", path.to_str().unwrap(), "--oracle", oracle]));
        assert!((v["hi"].as_f64().unwrap() - 1.0).abs() < 1e-6, "{v}");
        assert!(v["lo"].as_f64().unwrap() <= v["hi"].as_f64().unwrap() + 1e-12);
    }
}

#[test]
fn reduce_segments() {
    let v = json(&ellipt(&["ee", "reduce", "-i", data("segments.json").to_str().unwrap()]));
    assert_eq!(v["keep"], serde_json::json!([0, 1]));
}

#[test]
fn jsr_example_pair() {
    let out = ellipt(&["jsr", "-i", data("appendix_T.json").to_str().unwrap(), "--alpha", "0.3", "--beta", "-0.4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["jsr"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(v["smp"], serde_json::json!([0, 1]));
}

#[test]
fn lyapunov_rotation() {
    let v = json(&ellipt(&["lyapunov", "-i", data("rotation.json").to_str().unwrap()]));
    assert_eq!(v["valid"], true);
    assert!((v["rho"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn hardness_three() {
    let v = json(&ellipt(&["hardness", "--n", "3"]));
    assert_eq!(v["local_maxima"], 8);
    assert_eq!(v["distinct_values"], 8);
    assert!(v["facets"].as_u64().unwrap() <= 9);
}

#[test]
fn dataset_round_trip_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let res = Command::new(env!("CARGO_BIN_EXE_ellipt"))
            .args(["bench", "dataset", "--d-min", "2", "--d-max", "3", "--polytopes", "1", "--per", "2"])
            .args(["--seed", seed, "--jobs", "1", "--out", out.to_str().unwrap()])
            .env("ELLIPT_SEED", "7")
            .output()
            .unwrap();
        assert!(res.status.success());
        out
    };
    let a = run("a", "1");
    let b = run("b", "2");
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in &names {
        let fa = std::fs::read_to_string(a.join(name)).unwrap();
        assert_eq!(fa, std::fs::read_to_string(b.join(name)).unwrap());
        let out = ellipt(&["ee", "decide", "-i", a.join(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("acc");
    let res = ellipt(&[
        "bench", "accuracy", "--d-min", "2", "--d-max", "3", "--polytopes", "1", "--per", "2", "--jobs", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert!(runs.starts_with("schema,run_id,instance,d,n_vertices,method,q,time_ms,verdict,value"));
    assert_eq!(runs.lines().count(), 1 + 4 * 4);
    let v = json(&res);
    assert_eq!(v["instances"], 4);
}
