//! equiv, tensor, split, descend and realize-sigma.

use serde_json::{json, Value};
use skewmat::descent::{
    fixed_subalgebra, quaternion, quaternion_subfield, realize_sigma, resplit, sigma_galois, split_to_skew, DescentError,
    SplitInput,
};
use skewmat::field::{Field, FieldElement};
use skewmat::frame::is_simple;
use skewmat::json::{
    algebra_from_json, algebra_to_json, datum_from_json, datum_to_json, element_from_json, element_to_json,
    field_from_json, field_to_json, matrix_to_json, realize_spec_from_json, skewset_from_json, skewset_to_json,
    subspace_from_json, subspace_to_json, vector_from_json, vector_to_json,
};
use skewmat::linalg::{RowSpace, Vector};
use skewmat::skewalgebra::{is_associative, nuclei};
use skewmat::skewset::{Equivalence, NotEquivalentReason};
use skewmat::structalg::{verify_semiassociative, Atom, Certificate, StructAlgebra};

use crate::report::{validation, CliError};

fn descent_error(e: DescentError) -> CliError {
    match e {
        DescentError::DIsSquare
        | DescentError::RootsNotDistinct
        | DescentError::BadSplitInput(_)
        | DescentError::ConjugacyViolated(_)
        | DescentError::BadPermutation(_)
        | DescentError::BadTargets(_)
        | DescentError::Skew(_)
        | DescentError::Field(_) => validation(e.to_string()),
        other => CliError::Other(other.into()),
    }
}

fn atoms_json(atoms: &[Atom]) -> Value {
    Value::Array(
        atoms
            .iter()
            .map(|a| json!({"dim": a.dim, "center_dim": a.center_dim, "degree": a.degree, "certified": a.certified}))
            .collect(),
    )
}

fn gamma_json(g: &[Vec<FieldElement>]) -> Value {
    Value::Array(g.iter().map(|row| vector_to_json(row)).collect())
}

pub fn equiv(a: &Value, b: &Value) -> Result<Value, CliError> {
    let (c, d) = (skewset_from_json(a)?, skewset_from_json(b)?);
    if c.field() != d.field() {
        return Err(validation(format!("fields differ: {} vs {}", c.field(), d.field())));
    }
    if c.n() != d.n() {
        return Ok(json!({"equivalent": false, "reason": format!("degrees differ: {} vs {}", c.n(), d.n())}));
    }
    let eq = c.equivalent(&d).map_err(|e| validation(e.to_string()))?;
    Ok(match eq {
        Equivalence::Witness(g) => json!({"equivalent": true, "gamma": gamma_json(&g)}),
        Equivalence::NotEquivalent(NotEquivalentReason::Pattern((i, j, k))) => {
            json!({"equivalent": false, "reason": "zero patterns differ", "triple": [i, j, k]})
        }
        Equivalence::NotEquivalent(NotEquivalentReason::System) => {
            json!({"equivalent": false, "reason": "no solution of the multiplicative system"})
        }
    })
}

pub fn tensor(a: &Value, b: &Value) -> Result<Value, CliError> {
    let (c, d) = (skewset_from_json(a)?, skewset_from_json(b)?);
    let t = c.tensor(&d).map_err(|e| validation(e.to_string()))?;
    let r = nuclei(&t);
    Ok(json!({
        "n": t.n(),
        "skewset": skewset_to_json(&t),
        "associative": is_associative(&t).associative,
        "simple": is_simple(&t).simple,
        "atoms": r.atoms,
    }))
}

fn optional_seed(spec: &Value, default: u64) -> u64 {
    spec.get("seed").and_then(Value::as_u64).unwrap_or(default)
}

/// Distinct scalars 1, 2, ..., n (or the first n field elements).
fn distinct_scalars(f: &Field, n: usize) -> Result<Vec<FieldElement>, CliError> {
    if f.is_finite() {
        let xs: Vec<FieldElement> = f.elements().take(n).collect();
        if xs.len() < n {
            return Err(validation(format!("{f} has fewer than {n} elements; give the algebra, K and u explicitly")));
        }
        Ok(xs)
    } else {
        Ok((1..=n as i64).map(|i| f.from_i64(i)).collect())
    }
}

/// Builds (A, K, u, E) from one of the spec forms.
fn split_input(spec: &Value) -> Result<SplitInput, CliError> {
    let (a, k, u) = if let Some(q) = spec.get("quaternion") {
        let f = field_from_json(q.get("field").ok_or_else(|| validation("quaternion needs \"field\""))?)?;
        let d = element_from_json(&f, q.get("d").ok_or_else(|| validation("quaternion needs \"d\""))?)?;
        let b = q.get("b").and_then(Value::as_array).filter(|b| b.len() == 2);
        let b = b.ok_or_else(|| validation("quaternion \"b\" is [b0, b1]"))?;
        let (b0, b1) = (element_from_json(&f, &b[0])?, element_from_json(&f, &b[1])?);
        let a = quaternion(&f, &d, (&b0, &b1)).map_err(descent_error)?;
        let k = quaternion_subfield(&a);
        let u = a.basis_vector(1);
        (a, k, u)
    } else if let Some(s) = spec.get("skewset") {
        let c = skewset_from_json(s)?;
        let n = c.n();
        let a = StructAlgebra::from_skew(&c);
        let k = RowSpace::spanned_by(c.field(), n * n, (0..n).map(|i| a.basis_vector(i * n + i)).collect::<Vec<_>>());
        let mut u: Vector = vec![c.field().zero(); n * n];
        for (i, x) in distinct_scalars(c.field(), n)?.into_iter().enumerate() {
            u[i * n + i] = x;
        }
        (a, k, u)
    } else if let Some(alg) = spec.get("algebra") {
        let a = algebra_from_json(alg)?;
        let k = subspace_from_json(a.field(), spec.get("k").ok_or_else(|| validation("split needs \"k\""))?, a.dim())?;
        let u = vector_from_json(a.field(), spec.get("u").ok_or_else(|| validation("split needs \"u\""))?, a.dim())?;
        (a, k, u)
    } else {
        return Err(validation("split spec needs one of \"quaternion\", \"skewset\" or \"algebra\""));
    };
    let e = match spec.get("extension") {
        Some(e) => field_from_json(e)?,
        None => a.field().clone(),
    };
    match spec.get("roots") {
        Some(r) => {
            let roots = r.as_array().ok_or_else(|| validation("\"roots\" must be an array"))?;
            let roots: Result<Vec<_>, _> = roots.iter().map(|x| element_from_json(&e, x)).collect();
            SplitInput::new(a, k, u, e, roots?).map_err(descent_error)
        }
        None => SplitInput::with_roots_in(a, k, u, e).map_err(descent_error),
    }
}

pub fn split(spec: &Value, seed: u64) -> Result<Value, CliError> {
    let input = split_input(spec)?;
    let v = match spec.get("v") {
        Some(v) => Some(vector_from_json(&input.e, v, input.a.dim())?),
        None => None,
    };
    let seed = optional_seed(spec, seed);
    let s = split_to_skew(&input, v.as_ref(), seed).map_err(descent_error)?;
    let c = &s.c;
    let reduced = c.triples().all(|(i, j, k)| !(j == i || j == k) || c.get(i, j, k).is_one());
    Ok(json!({
        "n": c.n(),
        "extension": field_to_json(&input.e),
        "roots": Value::Array(input.roots.iter().map(element_to_json).collect()),
        "skewset": skewset_to_json(c),
        "transition": matrix_to_json(&s.transition),
        "v": vector_to_json(&s.v),
        "verified": true,
        "reduced": reduced,
        "simple": is_simple(c).simple,
        "associative": is_associative(c).associative,
    }))
}

pub fn descend(spec: &Value, seed: u64) -> Result<Value, CliError> {
    let d = datum_from_json(spec.get("datum").unwrap_or(spec))?;
    let seed = optional_seed(spec, seed);
    let desc = fixed_subalgebra(&d, seed).map_err(descent_error)?;
    let cert = Certificate { k: desc.k.clone(), generator: desc.generator.clone() };
    let verdict = verify_semiassociative(&desc.algebra, &cert, seed);
    let sigma = sigma_galois(&d, &desc).map_err(descent_error)?;
    let round_trip = match resplit(&d, &desc, seed) {
        Ok(s) => {
            let eq = s.c.equivalent(&d.c).map_err(|e| CliError::Other(e.into()))?;
            json!({"equivalent": eq.is_equivalent(), "skewset": skewset_to_json(&s.c)})
        }
        Err(DescentError::NoGenerator) => json!({"equivalent": null, "reason": "descended diagonal has no generator"}),
        Err(e) => return Err(descent_error(e)),
    };
    Ok(json!({
        "datum": datum_to_json(&d),
        "dim": desc.algebra.dim(),
        "algebra": algebra_to_json(&desc.algebra),
        "diagonal": subspace_to_json(&desc.k),
        "generator": desc.generator.as_ref().map(|g| vector_to_json(g)),
        "certificate": {
            "passed": verdict.passed,
            "failure": verdict.failure.as_ref().map(|f| format!("{f:?}")),
            "stage": verdict.failure.as_ref().map(|f| f.stage()),
        },
        "sigma": {"nucleus_dim": sigma.nucleus_dim, "radical_dim": sigma.radical_dim, "atoms": atoms_json(&sigma.atoms)},
        "resplit": round_trip,
    }))
}

pub fn realize(spec: &Value, seed: u64) -> Result<Value, CliError> {
    let (p, targets) = realize_spec_from_json(spec)?;
    let seed = optional_seed(spec, seed);
    let r = realize_sigma(p, &targets, seed).map_err(descent_error)?;
    Ok(json!({
        "p": p,
        "targets": targets,
        "datum": datum_to_json(&r.datum),
        "dim": r.descended.algebra.dim(),
        "sigma": {"nucleus_dim": r.sigma.nucleus_dim, "radical_dim": r.sigma.radical_dim, "atoms": atoms_json(&r.sigma.atoms)},
    }))
}

/// For tests: degree-2 skew set JSON over a field.
#[cfg(test)]
pub fn degree_two_json(f: &Field, x: i64, y: i64) -> Value {
    skewset_to_json(&skewmat::skewset::degree_two(f, f.from_i64(x), f.from_i64(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use skewmat::skewset::SkewSet;

    #[test]
    fn equivalence_by_ratio() {
        let f = Field::gf(7).unwrap();
        let r = equiv(&degree_two_json(&f, 2, 3), &degree_two_json(&f, 4, 6)).unwrap();
        assert_eq!(r["equivalent"], json!(true));
        let r = equiv(&degree_two_json(&f, 2, 3), &degree_two_json(&f, 3, 2)).unwrap();
        assert_eq!(r["equivalent"], json!(false));
        let r = equiv(&degree_two_json(&f, 0, 3), &degree_two_json(&f, 3, 0)).unwrap();
        assert_eq!(r["reason"], json!("zero patterns differ"));
    }

    #[test]
    fn tensor_of_trivial() {
        let f = Field::rational();
        let t = tensor(&skewset_to_json(&SkewSet::trivial(2, &f)), &skewset_to_json(&SkewSet::trivial(3, &f))).unwrap();
        assert_eq!(t["n"], json!(6));
        assert_eq!(t["atoms"], json!([6]));
    }

    #[test]
    fn split_quaternion_spec() {
        let spec = json!({
            "quaternion": {"field": {"kind": "gfp", "p": 5}, "d": "2", "b": ["1", "1"]},
            "extension": {"kind": "gfq", "p": 5, "k": 2},
        });
        let r = split(&spec, 0).unwrap();
        assert_eq!(r["reduced"], json!(true));
        assert_eq!(r["simple"], json!(true));
        assert_eq!(r["associative"], json!(false));
    }

    #[test]
    fn split_skewset_spec() {
        let f = Field::gf(7).unwrap();
        let r = split(&json!({"skewset": degree_two_json(&f, 2, 3)}), 0).unwrap();
        let back = skewset_from_json(&r["skewset"]).unwrap();
        let orig = skewset_from_json(&degree_two_json(&f, 2, 3)).unwrap();
        assert!(orig.equivalent(&back).unwrap().is_equivalent());
    }

    #[test]
    fn descend_and_realize() {
        let spec = json!({
            "field": {"kind": "gfq", "p": 3, "k": 2},
            "skewset": {"n": 2},
            "perm": [2, 1],
        });
        let r = descend(&spec, 0).unwrap();
        assert_eq!(r["dim"], json!(4));
        assert_eq!(r["certificate"]["passed"], json!(true));
        assert_eq!(r["resplit"]["equivalent"], json!(true));
        let r = realize(&json!({"p": 3, "targets": [[1, 1], [2, 1]]}), 0).unwrap();
        let mut atoms: Vec<(u64, u64)> = r["sigma"]["atoms"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| (a["dim"].as_u64().unwrap(), a["center_dim"].as_u64().unwrap()))
            .collect();
        atoms.sort_unstable();
        assert_eq!(atoms, vec![(1, 1), (2, 2)]);
    }

    #[test]
    fn bad_specs_are_validation_errors() {
        assert!(matches!(split(&json!({}), 0), Err(CliError::Validation(_))));
        let spec = json!({"quaternion": {"field": {"kind": "gfp", "p": 5}, "d": "4", "b": ["1", "1"]}});
        assert!(matches!(split(&spec, 0), Err(CliError::Validation(_))));
        let spec = json!({"field": {"kind": "gfq", "p": 3, "k": 2}, "skewset": {"n": 2}, "perm": [1, 1]});
        assert!(matches!(descend(&spec, 0), Err(CliError::Validation(_))));
    }
}
