use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewmat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> TempDir {
        let p = std::env::temp_dir().join(format!("skewmat-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&p);
        std::fs::create_dir_all(&p).unwrap();
        TempDir(p)
    }

    fn write(&self, name: &str, v: &Value) -> String {
        let p = self.0.join(name);
        std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
        p.display().to_string()
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn degree_two(x: &str, y: &str) -> Value {
    json!({"n": 2, "field": {"kind": "rational"}, "entries": [
        {"i": 1, "j": 2, "k": 1, "v": x}, {"i": 2, "j": 1, "k": 2, "v": y}]})
}

#[test]
fn analyze_examples() {
    let t = TempDir::new("analyze");
    let trivial = t.write("trivial.json", &json!({"n": 3}));
    let out = run(&["analyze", &trivial]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    assert_eq!(r["schema_version"], json!(1));
    assert_eq!(r["command"], json!("analyze"));
    assert!(r["input_digest"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(r["results"]["simple"], json!(true));
    assert_eq!(r["results"]["associative"], json!(true));
    assert_eq!(r["results"]["atoms"], json!([3]));

    let zero = t.write("zero.json", &degree_two("0", "0"));
    let r = stdout_json(&run(&["analyze", &zero]));
    assert_eq!(r["results"]["simple"], json!(false));
    assert_eq!(r["results"]["associative"], json!(true));
    assert_eq!(r["results"]["atoms"], json!([1, 1]));
    assert_eq!(r["results"]["radical_positions"], json!([[1, 2], [2, 1]]));

    let out = run(&["analyze", &trivial, &zero]);
    let r = stdout_json(&out);
    assert_eq!(r["results"][0]["path"], json!(trivial));
    assert_eq!(r["results"][1]["analysis"]["simple"], json!(false));
}

#[test]
fn analyze_uses_field_flag() {
    let t = TempDir::new("field");
    let p = t.write("c.json", &json!({"n": 2, "entries": [{"i": 1, "j": 2, "k": 1, "v": "3"}]}));
    let r = stdout_json(&run(&["analyze", "--field", "GF(3)", &p]));
    assert_eq!(r["results"]["field"], json!({"kind": "gfp", "p": 3}));
    assert_eq!(r["results"]["simple"], json!(false));
}

#[test]
fn validation_errors_exit_2() {
    let t = TempDir::new("invalid");
    let bad = t.write("bad.json", &json!({"n": 2, "entries": [{"i": 1, "j": 1, "k": 2, "v": "5"}]}));
    assert_eq!(run(&["analyze", &bad]).status.code(), Some(2));
    let p = t.0.join("broken.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert_eq!(run(&["analyze", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["fuzz", "--n", "4", "--exhaustive"]).status.code(), Some(2));
    assert_eq!(run(&["fuzz", "--field", "GF(6)"]).status.code(), Some(2));
}

#[test]
fn ideal_cap_exits_3_with_partial_report() {
    let t = TempDir::new("cap");
    let zero = t.write("zero.json", &degree_two("0", "0"));
    let out = run(&["analyze", "--cap-ideals", "3", &zero]);
    assert_eq!(out.status.code(), Some(3));
    let r = stdout_json(&out);
    assert_eq!(r["results"]["ideals_truncated"], json!(true));
    assert_eq!(r["results"]["ideal_count"], Value::Null);
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let args = ["fuzz", "--n", "3", "--field", "GF(5)", "--count", "60", "--seed", "9"];
    let one = bin().args(args).env("SKEWMAT_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("SKEWMAT_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn fuzz_examples() {
    let out = run(&["fuzz", "--n", "3", "--field", "Q", "--density", "0.3", "--count", "500", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_json(&out);
    assert_eq!(r["results"]["checked"], json!(500));
    assert_eq!(r["results"]["violation"], Value::Null);
    assert_eq!(r["seed"], json!(1));

    let r = stdout_json(&run(&["fuzz", "--count", "0"]));
    assert_eq!(r["results"]["checked"], json!(0));

    let out = run(&["fuzz", "--n", "2", "--field", "GF(5)", "--exhaustive"]);
    assert!(out.status.success());
    let types = &stdout_json(&out)["results"]["degree_two_types"];
    assert_eq!(types["zero_zero"]["associative"], json!(1));
    assert_eq!(types["one_zero"]["simple"], json!(0));
    assert_eq!(types["nonzero_nonzero"]["simple"], json!(16));
}

#[test]
fn paper_suite_runs_and_detects_perturbation() {
    let out = run(&["paper-suite"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_json(&out);
    assert_eq!(r["results"]["failed"], json!(0));

    let r = stdout_json(&run(&["paper-suite", "--only", "badsquare"]));
    assert_eq!(r["results"]["cases"].as_array().unwrap().len(), 1);
    assert_eq!(run(&["paper-suite", "--only", "no-such-case"]).status.code(), Some(2));

    let t = TempDir::new("golden");
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("golden");
    for entry in std::fs::read_dir(&golden).unwrap() {
        let p = entry.unwrap().path();
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        if v["id"] == json!("nonnormal") {
            v["expect"]["nucleus"] = json!("Δ+{(2,1)}");
        }
        t.write(p.file_name().unwrap().to_str().unwrap(), &v);
    }
    let out = run(&["paper-suite", "--golden-dir", t.0.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    let r = stdout_json(&out);
    let failed: Vec<&Value> = r["results"]["cases"].as_array().unwrap().iter().filter(|c| c["pass"] == json!(false)).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["id"], json!("nonnormal"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonnormal"));
}

#[test]
fn equiv_and_tensor() {
    let t = TempDir::new("pairs");
    let a = t.write("a.json", &degree_two("2", "3"));
    let b = t.write("b.json", &degree_two("4", "6"));
    let c = t.write("c.json", &degree_two("3", "2"));
    let r = stdout_json(&run(&["equiv", &a, &b]));
    assert_eq!(r["results"]["equivalent"], json!(true));
    assert_eq!(r["results"]["gamma"].as_array().unwrap().len(), 2);
    let r = stdout_json(&run(&["equiv", &a, &c]));
    assert_eq!(r["results"]["equivalent"], json!(false));
    let r = stdout_json(&run(&["tensor", &a, &b]));
    assert_eq!(r["results"]["n"], json!(4));
    assert_eq!(r["results"]["simple"], json!(true));
}

#[test]
fn split_descend_realize() {
    let t = TempDir::new("specs");
    let split = t.write(
        "split.json",
        &json!({"quaternion": {"field": {"kind": "gfp", "p": 7}, "d": "3", "b": ["1", "2"]},
                "extension": {"kind": "gfq", "p": 7, "k": 2}}),
    );
    let out = run(&["split", "--pretty", &split]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_json(&out);
    assert_eq!(r["results"]["reduced"], json!(true));
    assert_eq!(r["results"]["simple"], json!(true));

    let descend = t.write("descend.json", &json!({"field": {"kind": "gfq", "p": 5, "k": 2}, "skewset": {"n": 2}, "perm": [2, 1]}));
    let r = stdout_json(&run(&["descend", &descend]));
    assert_eq!(r["results"]["dim"], json!(4));
    assert_eq!(r["results"]["certificate"]["passed"], json!(true));
    assert_eq!(r["results"]["resplit"]["equivalent"], json!(true));

    let realize = t.write("realize.json", &json!({"p": 5, "targets": [[2, 1], [2, 1]]}));
    let r = stdout_json(&run(&["realize-sigma", &realize]));
    let atoms = r["results"]["sigma"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    assert!(atoms.iter().all(|a| a["dim"] == json!(2) && a["center_dim"] == json!(2)));

    let bad = t.write("bad.json", &json!({"p": 5, "targets": []}));
    assert_eq!(run(&["realize-sigma", &bad]).status.code(), Some(2));
}
