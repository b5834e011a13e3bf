//! Golden cases: each file names a command, its input and the expected
//! values at JSON pointers into the result.

use std::path::Path;

use serde_json::{json, Value};
use skewmat::frame::{is_ideal_square_ideal, IdealGraph};
use skewmat::json::skewset_from_json;
use skewmat::skewset::Pos;

use crate::analyze::analyze;
use crate::fuzz::{run as run_fuzz, FuzzParams};
use crate::ops;
use crate::report::{parse_field, positions_json, validation, CliError};

pub const EMBEDDED: [(&str, &str); 20] = [
    ("badsquare.json", include_str!("../golden/badsquare.json")),
    ("degree2-simple-associative.json", include_str!("../golden/degree2-simple-associative.json")),
    ("degree2-simple-nonassociative.json", include_str!("../golden/degree2-simple-nonassociative.json")),
    ("degree2-zero-nonzero.json", include_str!("../golden/degree2-zero-nonzero.json")),
    ("degree2-zero-zero.json", include_str!("../golden/degree2-zero-zero.json")),
    ("descend-twisted-m2.json", include_str!("../golden/descend-twisted-m2.json")),
    ("fuzz-degree2-gf5.json", include_str!("../golden/fuzz-degree2-gf5.json")),
    ("nonnormal.json", include_str!("../golden/nonnormal.json")),
    ("realize-1-1-2-1.json", include_str!("../golden/realize-1-1-2-1.json")),
    ("realize-2-1-2-1.json", include_str!("../golden/realize-2-1-2-1.json")),
    ("semiprime.json", include_str!("../golden/semiprime.json")),
    ("simple-zero-c-n3.json", include_str!("../golden/simple-zero-c-n3.json")),
    ("simple-zero-c-n4.json", include_str!("../golden/simple-zero-c-n4.json")),
    ("simple-zero-c-n5.json", include_str!("../golden/simple-zero-c-n5.json")),
    ("simple-zero-c-n6.json", include_str!("../golden/simple-zero-c-n6.json")),
    ("split-quaternion-gf3.json", include_str!("../golden/split-quaternion-gf3.json")),
    ("split-quaternion-gf5.json", include_str!("../golden/split-quaternion-gf5.json")),
    ("split-quaternion-gf7.json", include_str!("../golden/split-quaternion-gf7.json")),
    ("trivial-3.json", include_str!("../golden/trivial-3.json")),
    ("zero-matrix-algebra.json", include_str!("../golden/zero-matrix-algebra.json")),
];

pub struct Case {
    pub id: String,
    pub command: String,
    pub input: Value,
    pub expect: serde_json::Map<String, Value>,
}

fn parse_case(name: &str, text: &str) -> Result<Case, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| validation(format!("{name}: {e}")))?;
    let field = |k: &str| v.get(k).ok_or_else(|| validation(format!("{name}: missing \"{k}\"")));
    Ok(Case {
        id: field("id")?.as_str().ok_or_else(|| validation(format!("{name}: id must be a string")))?.to_string(),
        command: field("command")?.as_str().unwrap_or_default().to_string(),
        input: field("input")?.clone(),
        expect: field("expect")?.as_object().cloned().ok_or_else(|| validation(format!("{name}: expect must be an object")))?,
    })
}

pub fn load(dir: Option<&Path>) -> Result<Vec<Case>, CliError> {
    let mut cases = Vec::new();
    match dir {
        None => {
            for (name, text) in EMBEDDED {
                cases.push(parse_case(name, text)?);
            }
        }
        Some(dir) => {
            let mut paths: Vec<_> = std::fs::read_dir(dir)
                .map_err(|e| validation(format!("cannot read {}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            for p in paths {
                let text = std::fs::read_to_string(&p).map_err(|e| validation(format!("cannot read {}: {e}", p.display())))?;
                cases.push(parse_case(&p.display().to_string(), &text)?);
            }
        }
    }
    Ok(cases)
}

fn ideal_square(input: &Value) -> Result<Value, CliError> {
    let c = skewset_from_json(input.get("skewset").ok_or_else(|| validation("missing \"skewset\""))?)?;
    let ideal: Result<std::collections::BTreeSet<Pos>, CliError> = input
        .get("ideal")
        .and_then(Value::as_array)
        .ok_or_else(|| validation("missing \"ideal\""))?
        .iter()
        .map(|p| match p.as_array().map(|a| (a.first().and_then(Value::as_u64), a.get(1).and_then(Value::as_u64))) {
            Some((Some(i), Some(j))) => Ok((i as usize, j as usize)),
            _ => Err(validation("positions are [i, j]")),
        })
        .collect();
    let ideal = ideal?;
    let closed = IdealGraph::build(&c).is_closed(&ideal);
    let (square, square_closed) = is_ideal_square_ideal(&c, &ideal).map_err(|e| validation(e.to_string()))?;
    Ok(json!({"is_ideal": closed, "square": positions_json(&square), "square_is_ideal": square_closed}))
}

/// Runs one case's command; the result is what `expect` is checked against.
pub fn evaluate(case: &Case, cap: usize) -> Result<Value, CliError> {
    let input = &case.input;
    match case.command.as_str() {
        "analyze" => Ok(analyze(&skewset_from_json(input)?, cap).value),
        "ideal-square" => ideal_square(input),
        "split" => ops::split(input, 0),
        "descend" => ops::descend(input, 0),
        "realize-sigma" => ops::realize(input, 0),
        "fuzz" => {
            let get = |k: &str| input.get(k).ok_or_else(|| validation(format!("fuzz case needs \"{k}\"")));
            let p = FuzzParams {
                n: get("n")?.as_u64().unwrap_or(0) as usize,
                field: parse_field(get("field")?.as_str().unwrap_or_default())?,
                density: input.get("density").and_then(Value::as_f64).unwrap_or(0.5),
                count: input.get("count").and_then(Value::as_u64).unwrap_or(0) as usize,
                seed: input.get("seed").and_then(Value::as_u64).unwrap_or(0),
                exhaustive: input.get("exhaustive").and_then(Value::as_bool).unwrap_or(false),
                cap,
            };
            Ok(run_fuzz(&p).results)
        }
        other => Err(validation(format!("case {}: unknown command \"{other}\"", case.id))),
    }
}

/// Keys of `expect` are JSON pointers into the result, written without
/// the leading slash.
pub fn mismatches(case: &Case, result: &Value) -> Vec<String> {
    case.expect
        .iter()
        .filter_map(|(key, want)| {
            let got = result.pointer(&format!("/{key}"));
            (got != Some(want)).then(|| format!("{key}: expected {want}, got {}", got.map_or("nothing".into(), |g| g.to_string())))
        })
        .collect()
}

pub fn run_case(case: &Case, cap: usize) -> Value {
    match evaluate(case, cap) {
        Ok(result) => {
            let bad = mismatches(case, &result);
            json!({"id": case.id, "pass": bad.is_empty(), "mismatches": bad})
        }
        Err(e) => json!({"id": case.id, "pass": false, "mismatches": [format!("error: {e}")]}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_cases_pass() {
        let cases = load(None).unwrap();
        assert_eq!(cases.len(), EMBEDDED.len());
        for c in &cases {
            let r = run_case(c, 4096);
            assert_eq!(r["pass"], json!(true), "{r}");
        }
    }

    #[test]
    fn perturbed_case_fails() {
        let mut cases = load(None).unwrap();
        let c = cases.iter_mut().find(|c| c.id == "badsquare").unwrap();
        c.expect.insert("square".into(), json!([[1, 2]]));
        assert_eq!(run_case(c, 4096)["pass"], json!(false));
    }

    #[test]
    fn ids_are_unique() {
        let cases = load(None).unwrap();
        let ids: std::collections::BTreeSet<_> = cases.iter().map(|c| c.id.clone()).collect();
        assert_eq!(ids.len(), cases.len());
    }
}
