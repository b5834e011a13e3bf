//! JSON encodings of fields, elements, skew sets, algebras and descent data.
//!
//! Elements are strings ("a/b", "-3") or, over GF(p^k), coefficient arrays
//! low to high. Skew sets list deviations from a default at non-forced
//! positions, 1-based.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::descent::{DescentDatum, DescentError};
use crate::field::{Field, FieldElement, FieldError, FieldSpec};
use crate::linalg::{Matrix, RowSpace, Vector};
use crate::skewset::{is_forced, SkewError, SkewSet};
use crate::structalg::{StructAlgebra, StructError};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Skew(#[from] SkewError),
    #[error(transparent)]
    Struct(#[from] StructError),
    #[error(transparent)]
    Descent(#[from] DescentError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError::Invalid(msg.into()))
}

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value, JsonError> {
    v.get(key).ok_or_else(|| JsonError::Invalid(format!("missing key \"{key}\"")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize, JsonError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| JsonError::Invalid(format!("{what} must be a nonnegative integer")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, JsonError> {
    v.as_array().ok_or_else(|| JsonError::Invalid(format!("{what} must be an array")))
}

/// Accepts {"kind":"gfq","p":..,"k":..} without a modulus (first irreducible).
pub fn field_from_json(v: &Value) -> Result<Field, JsonError> {
    if v.get("kind").and_then(Value::as_str) == Some("gfq") && v.get("modulus").is_none() {
        let p = get(v, "p")?.as_u64().ok_or_else(|| JsonError::Invalid("p must be an integer".into()))?;
        let k = as_usize(get(v, "k")?, "k")?;
        return Ok(Field::gfq_default(p, k)?);
    }
    let spec: FieldSpec = serde_json::from_value(v.clone())?;
    Ok(Field::from_spec(&spec)?)
}

pub fn field_to_json(f: &Field) -> Value {
    serde_json::to_value(f.spec()).expect("field specs serialize")
}

pub fn element_from_json(f: &Field, v: &Value) -> Result<FieldElement, JsonError> {
    match v {
        Value::String(s) => Ok(f.parse(s)?),
        Value::Number(n) => Ok(f.parse(&n.to_string())?),
        Value::Array(items) => {
            if !f.is_finite() {
                return invalid("coefficient arrays need a finite field");
            }
            if items.len() > f.degree() {
                return invalid(format!("coefficient array longer than the degree {}", f.degree()));
            }
            let mut acc = f.zero();
            let mut power = f.one();
            let gen = f.generator();
            let fp = f.prime_field();
            for item in items {
                let c = f.embed(&element_from_json(&fp, item)?)?;
                acc = &acc + &(&c * &power);
                power = &power * &gen;
            }
            Ok(acc)
        }
        _ => invalid(format!("cannot read a field element from {v}")),
    }
}

pub fn element_to_json(x: &FieldElement) -> Value {
    let f = x.field();
    if f.is_finite() && f.degree() > 1 {
        json!(x.coeffs())
    } else {
        json!(x.to_string())
    }
}

pub fn vector_from_json(f: &Field, v: &Value, len: usize) -> Result<Vector, JsonError> {
    let items = as_array(v, "vector")?;
    if items.len() != len {
        return invalid(format!("vector has length {}, expected {len}", items.len()));
    }
    items.iter().map(|x| element_from_json(f, x)).collect()
}

pub fn vector_to_json(v: &[FieldElement]) -> Value {
    Value::Array(v.iter().map(element_to_json).collect())
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(m.rows().map(vector_to_json).collect())
}

pub fn skewset_from_json(v: &Value) -> Result<SkewSet, JsonError> {
    let field = field_from_json(get(v, "field")?)?;
    skewset_from_json_in(v, &field)
}

/// As [`skewset_from_json`], with `field` used when the object has none.
pub fn skewset_from_json_in(v: &Value, field: &Field) -> Result<SkewSet, JsonError> {
    let field = match v.get("field") {
        Some(f) => field_from_json(f)?,
        None => field.clone(),
    };
    let n = as_usize(get(v, "n")?, "n")?;
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if let Some(dense) = v.get("c") {
        let planes = as_array(dense, "c")?;
        let mut raw = Vec::with_capacity(n);
        for plane in planes {
            let mut rows = Vec::new();
            for row in as_array(plane, "c[i]")? {
                rows.push(as_array(row, "c[i][j]")?.iter().map(|x| element_from_json(&field, x)).collect::<Result<Vec<_>, _>>()?);
            }
            raw.push(rows);
        }
        let c = SkewSet::validate(&field, raw)?;
        if c.n() != n {
            return invalid(format!("dense c has degree {}, but n = {n}", c.n()));
        }
        return Ok(c);
    }
    let default = match v.get("default") {
        Some(d) => element_from_json(&field, d)?,
        None => field.one(),
    };
    let mut overrides = Vec::new();
    if let Some(entries) = v.get("entries") {
        for e in as_array(entries, "entries")? {
            let i = as_usize(get(e, "i")?, "i")?;
            let j = as_usize(get(e, "j")?, "j")?;
            let k = as_usize(get(e, "k")?, "k")?;
            let val = element_from_json(&field, get(e, "v")?)?;
            overrides.push(((i, j, k), val));
        }
    }
    Ok(SkewSet::with_entries(n, &field, &default, &overrides)?)
}

pub fn skewset_to_json(c: &SkewSet) -> Value {
    let n = c.n();
    let mut counts: BTreeMap<String, (usize, FieldElement)> = BTreeMap::new();
    for (i, j, k) in c.triples() {
        if !is_forced(i, j, k) {
            let x = c.get(i, j, k);
            counts.entry(x.to_string()).or_insert((0, x.clone())).0 += 1;
        }
    }
    let default = counts
        .values()
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.to_string().cmp(&a.1.to_string())))
        .map(|(_, x)| x.clone())
        .unwrap_or_else(|| c.field().one());
    let entries: Vec<Value> = c
        .triples()
        .filter(|&(i, j, k)| !is_forced(i, j, k) && *c.get(i, j, k) != default)
        .map(|(i, j, k)| json!({"i": i, "j": j, "k": k, "v": element_to_json(c.get(i, j, k))}))
        .collect();
    json!({"n": n, "field": field_to_json(c.field()), "default": element_to_json(&default), "entries": entries})
}

/// {"field", "dim", "unit", "constants"}: constants either a d×d×d nested
/// array or a list of sparse [a, b, e, value] with 0-based indices.
pub fn algebra_from_json(v: &Value) -> Result<StructAlgebra, JsonError> {
    let field = field_from_json(get(v, "field")?)?;
    let d = as_usize(get(v, "dim")?, "dim")?;
    let unit = vector_from_json(&field, get(v, "unit")?, d)?;
    let consts = as_array(get(v, "constants")?, "constants")?;
    let sparse = consts.first().is_some_and(|x| x.as_array().is_some_and(|a| a.len() == 4 && a[0].is_u64()));
    let mut triples = Vec::new();
    if sparse || consts.is_empty() {
        for t in consts {
            let t = as_array(t, "constant")?;
            if t.len() != 4 {
                return invalid("sparse constants are [a, b, e, value]");
            }
            let a = as_usize(&t[0], "a")?;
            let b = as_usize(&t[1], "b")?;
            let e = as_usize(&t[2], "e")?;
            triples.push((a, b, e, element_from_json(&field, &t[3])?));
        }
    } else {
        if consts.len() != d {
            return invalid("constants must be d×d×d");
        }
        for (a, plane) in consts.iter().enumerate() {
            let plane = as_array(plane, "constants[a]")?;
            if plane.len() != d {
                return invalid("constants must be d×d×d");
            }
            for (b, row) in plane.iter().enumerate() {
                let row = vector_from_json(&field, row, d)?;
                for (e, x) in row.into_iter().enumerate() {
                    if !x.is_zero() {
                        triples.push((a, b, e, x));
                    }
                }
            }
        }
    }
    Ok(StructAlgebra::from_sparse(&field, d, triples, unit)?)
}

pub fn algebra_to_json(a: &StructAlgebra) -> Value {
    let constants: Vec<Value> = a
        .sparse_constants()
        .map(|(x, y, e, v)| json!([x, y, e, element_to_json(v)]))
        .collect();
    json!({"field": field_to_json(a.field()), "dim": a.dim(), "unit": vector_to_json(a.unit()), "constants": constants})
}

pub fn subspace_from_json(f: &Field, v: &Value, dim: usize) -> Result<RowSpace, JsonError> {
    let rows: Result<Vec<Vector>, _> = as_array(v, "basis")?.iter().map(|r| vector_from_json(f, r, dim)).collect();
    Ok(RowSpace::spanned_by(f, dim, rows?))
}

pub fn subspace_to_json(s: &RowSpace) -> Value {
    Value::Array(s.basis().iter().map(|r| vector_to_json(r)).collect())
}

/// {"field", "skewset", "perm"}; the skew set may omit its own field.
pub fn datum_from_json(v: &Value) -> Result<DescentDatum, JsonError> {
    let field = match v.get("field") {
        Some(f) => field_from_json(f)?,
        None => field_from_json(get(get(v, "skewset")?, "field")?)?,
    };
    let c = skewset_from_json_in(get(v, "skewset")?, &field)?;
    if c.field() != &field {
        return invalid("skew set field differs from the datum field");
    }
    let perm: Result<Vec<usize>, _> = as_array(get(v, "perm")?, "perm")?.iter().map(|x| as_usize(x, "perm entry")).collect();
    Ok(DescentDatum::new(c, perm?)?)
}

pub fn datum_to_json(d: &DescentDatum) -> Value {
    json!({"field": field_to_json(d.field()), "skewset": skewset_to_json(&d.c), "perm": d.perm})
}

/// Targets of a realize-sigma spec {"p": p, "targets": [[m, d], ...]}.
pub fn realize_spec_from_json(v: &Value) -> Result<(u64, Vec<(usize, usize)>), JsonError> {
    let p = get(v, "p")?.as_u64().ok_or_else(|| JsonError::Invalid("p must be an integer".into()))?;
    let mut targets = Vec::new();
    for t in as_array(get(v, "targets")?, "targets")? {
        let t = as_array(t, "target")?;
        if t.len() != 2 {
            return invalid("targets are [m, d] pairs");
        }
        targets.push((as_usize(&t[0], "m")?, as_usize(&t[1], "d")?));
    }
    Ok((p, targets))
}

pub fn parse(text: &str) -> Result<Value, JsonError> {
    Ok(serde_json::from_str(text)?)
}

pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skewset::degree_two;

    #[test]
    fn fields_round_trip() {
        for text in [r#"{"kind":"rational"}"#, r#"{"kind":"gfp","p":7}"#, r#"{"kind":"gfq","p":3,"k":2,"modulus":[1,0,1]}"#] {
            let f = field_from_json(&parse(text).unwrap()).unwrap();
            assert_eq!(field_from_json(&field_to_json(&f)).unwrap(), f);
        }
        let f = field_from_json(&parse(r#"{"kind":"gfq","p":2,"k":3}"#).unwrap()).unwrap();
        assert_eq!(f.order(), Some(8));
        assert!(field_from_json(&parse(r#"{"kind":"gfp","p":8}"#).unwrap()).is_err());
    }

    #[test]
    fn elements() {
        let q = Field::rational();
        assert_eq!(element_from_json(&q, &json!("-3/6")).unwrap(), q.parse("-1/2").unwrap());
        assert_eq!(element_from_json(&q, &json!(4)).unwrap(), q.from_i64(4));
        let f9 = Field::gfq(3, vec![1, 0, 1]).unwrap();
        let x = element_from_json(&f9, &json!([2, 1])).unwrap();
        assert_eq!(x, &f9.from_i64(2) + &f9.generator());
        assert_eq!(element_from_json(&f9, &element_to_json(&x)).unwrap(), x);
        assert!(element_from_json(&f9, &json!([1, 1, 1])).is_err());
        assert!(element_from_json(&q, &json!([1])).is_err());
    }

    #[test]
    fn skewsets_round_trip() {
        let q = Field::rational();
        let zm = skewset_from_json(&json!({"n": 2, "field": {"kind": "rational"}, "default": "1",
            "entries": [{"i": 1, "j": 2, "k": 1, "v": "0"}, {"i": 2, "j": 1, "k": 2, "v": "0"}]}))
        .unwrap();
        assert_eq!(zm, degree_two(&q, q.zero(), q.zero()));
        for f in [q.clone(), Field::gf(5).unwrap(), Field::gfq(2, vec![1, 1, 1]).unwrap()] {
            for seed in 0..5 {
                let c = SkewSet::random(3, &f, 0.4, seed);
                assert_eq!(skewset_from_json(&skewset_to_json(&c)).unwrap(), c);
            }
        }
        let forced = json!({"n": 2, "field": {"kind": "rational"}, "entries": [{"i": 1, "j": 1, "k": 2, "v": "0"}]});
        assert!(matches!(skewset_from_json(&forced), Err(JsonError::Skew(_))));
        let dense = json!({"n": 2, "field": {"kind": "gfp", "p": 3},
            "c": [[["1","1"],["2","1"]], [["1","0"],["1","1"]]]});
        let c = skewset_from_json(&dense).unwrap();
        assert_eq!(c.get(1, 2, 1).to_string(), "2");
        assert!(c.get(2, 1, 2).is_zero());
    }

    #[test]
    fn algebras_and_data_round_trip() {
        let f = Field::gf(7).unwrap();
        let a = StructAlgebra::from_skew(&SkewSet::random(2, &f, 0.3, 1));
        let back = algebra_from_json(&algebra_to_json(&a)).unwrap();
        assert!(back.same_constants_under(&a, &[0, 1, 2, 3]));
        let dense = json!({"field": {"kind": "rational"}, "dim": 1, "unit": ["1"], "constants": [[["1"]]]});
        assert_eq!(algebra_from_json(&dense).unwrap().dim(), 1);
        let bad_unit = json!({"field": {"kind": "rational"}, "dim": 1, "unit": ["2"], "constants": [[["1"]]]});
        assert!(matches!(algebra_from_json(&bad_unit), Err(JsonError::Struct(StructError::NotUnital))));
        let d = crate::descent::random_datum(3, 2, 3, 0.3, 4).unwrap();
        assert_eq!(datum_from_json(&datum_to_json(&d)).unwrap(), d);
        let (p, t) = realize_spec_from_json(&json!({"p": 2, "targets": [[1, 1], [2, 1]]})).unwrap();
        assert_eq!((p, t), (2, vec![(1, 1), (2, 1)]));
    }
}
