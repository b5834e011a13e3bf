//! Invariant battery over random or exhaustively enumerated skew sets.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use skewmat::field::{Field, FieldElement};
use skewmat::frame::{enumerate_ideals, is_simple, IdealGraph};
use skewmat::json::{field_to_json, skewset_to_json};
use skewmat::skewalgebra::{
    center, ideal_generated, is_associative, nuclei, nucleus_is_semisimple_partition, span_of_positions, SkewElement,
};
use skewmat::skewset::{is_forced, Pos, SkewSet, Triple};
use skewmat::structalg::{sigma_of_skew, StructAlgebra};

/// Largest degree for the linear cross-checks.
pub const LINEAR_MAX_N: usize = 4;
/// Largest degree for exhaustive enumeration.
pub const EXHAUSTIVE_MAX_N: usize = 3;
/// Enumerate every value assignment when there are at most this many.
pub const FULL_ENUMERATION_LIMIT: u64 = 1 << 16;

pub const INVARIANTS: [&str; 10] = [
    "simplicity",
    "regular-partition",
    "nucleus-split",
    "regular-atoms",
    "nucleus-linear",
    "associativity-linear",
    "homogeneity",
    "center-scalar",
    "equivalence-gauge",
    "sigma-degrees",
];

/// Seed of instance `index`, independent of scheduling.
fn instance_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index).rotate_left(17) ^ index
}

/// Runs the battery on one set; `Err` names the first failing invariant.
pub fn check(c: &SkewSet, seed: u64, cap: usize) -> Result<(), &'static str> {
    let n = c.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = is_simple(c);
    if s.simple != (s.scc_count == 1) {
        return Err("simplicity");
    }
    if let Ok(lattice) = enumerate_ideals(c, Some(cap)) {
        if !lattice.truncated && s.simple != (lattice.ideals.len() == 2) {
            return Err("simplicity");
        }
    }
    let r = nuclei(c);
    if r.regular != nucleus_is_semisimple_partition(c, &r) {
        return Err("regular-partition");
    }
    let j: BTreeSet<Pos> = r.nucleus.iter().copied().filter(|&(i, j)| c.get(i, j, i).is_zero()).collect();
    let union: BTreeSet<Pos> = r.s_positions.union(&r.j_positions).copied().collect();
    if j != r.j_positions || union != r.nucleus || !r.s_positions.is_disjoint(&r.j_positions) {
        return Err("nucleus-split");
    }
    if r.regular && r.atoms.as_ref().map(|a| a.iter().sum::<usize>()) != Some(n) {
        return Err("regular-atoms");
    }
    if n <= LINEAR_MAX_N {
        let a = StructAlgebra::from_skew(c);
        if a.nucleus_linear() != span_of_positions(c, &r.nucleus) {
            return Err("nucleus-linear");
        }
        if a.is_associative() != is_associative(c).associative {
            return Err("associativity-linear");
        }
        if r.regular {
            let mut degrees: Vec<usize> = sigma_of_skew(c).atoms.iter().filter_map(|a| a.degree).collect();
            degrees.sort_unstable_by(|x, y| y.cmp(x));
            if Some(&degrees) != r.atoms.as_ref() {
                return Err("sigma-degrees");
            }
        }
    }
    let arc = Arc::new(c.clone());
    let density = rng.random_range(0.05..0.5);
    let x = SkewElement::random(&arc, &mut rng, density);
    let closure = IdealGraph::build(c).closure(&x.support()).map_err(|_| "homogeneity")?;
    if ideal_generated(&x) != span_of_positions(c, &closure) {
        return Err("homogeneity");
    }
    if center(c).len() != 1 {
        return Err("center-scalar");
    }
    let f = c.field();
    let gamma: Vec<Vec<FieldElement>> = (0..n)
        .map(|i| (0..n).map(|k| if i == k { f.one() } else { f.random_nonzero(&mut rng) }).collect())
        .collect();
    let moved = c.apply_gamma(&gamma).map_err(|_| "equivalence-gauge")?;
    match moved.equivalent(c) {
        Ok(e) if e.is_equivalent() => Ok(()),
        _ => Err("equivalence-gauge"),
    }
}

/// Greedy shrinking: drop indices, then set entries to 1, while
/// `fails` still holds.
pub fn minimize_by(c: &SkewSet, fails: impl Fn(&SkewSet) -> bool) -> SkewSet {
    let mut cur = c.clone();
    'indices: loop {
        let n = cur.n();
        if n <= 1 {
            break;
        }
        for drop in 1..=n {
            let keep: Vec<usize> = (1..=n).filter(|&i| i != drop).collect();
            let d = cur.restrict(&keep);
            if fails(&d) {
                cur = d;
                continue 'indices;
            }
        }
        break;
    }
    let f = cur.field().clone();
    let triples: Vec<Triple> = cur.triples().filter(|&(i, j, k)| !is_forced(i, j, k)).collect();
    for t in triples {
        let x = cur.get(t.0, t.1, t.2);
        if x.is_zero() || x.is_one() {
            continue;
        }
        if let Ok(d) = SkewSet::from_fn(cur.n(), &f, |i, j, k| if (i, j, k) == t { f.one() } else { cur.get(i, j, k).clone() }) {
            if fails(&d) {
                cur = d;
            }
        }
    }
    cur
}

pub fn minimize(c: &SkewSet, seed: u64, cap: usize, failing: &'static str) -> SkewSet {
    minimize_by(c, |d| check(d, seed, cap) == Err(failing))
}

pub struct FuzzParams {
    pub n: usize,
    pub field: Field,
    pub density: f64,
    pub count: usize,
    pub seed: u64,
    pub exhaustive: bool,
    pub cap: usize,
}

pub struct FuzzOutcome {
    pub results: Value,
    /// First failing instance: invariant name and minimized reproducer.
    pub violation: Option<(&'static str, Value)>,
}

fn free_triples(n: usize) -> Vec<Triple> {
    (1..=n)
        .flat_map(|i| (1..=n).flat_map(move |j| (1..=n).map(move |k| (i, j, k))))
        .filter(|&(i, j, k)| !is_forced(i, j, k))
        .collect()
}

fn build(n: usize, f: &Field, free: &[Triple], values: &[FieldElement]) -> SkewSet {
    SkewSet::from_fn_reduced(n, f, |i, j, k| match free.iter().position(|&t| t == (i, j, k)) {
        Some(p) => values[p].clone(),
        None => f.one(),
    })
}

/// All inputs of an exhaustive run: every assignment when few enough,
/// otherwise every zero pattern with random nonzero values.
fn exhaustive_inputs(p: &FuzzParams) -> Vec<SkewSet> {
    let f = &p.field;
    let free = free_triples(p.n);
    let total = f.order().and_then(|q| q.checked_pow(free.len() as u32));
    match total {
        Some(t) if t <= FULL_ENUMERATION_LIMIT => {
            let elems: Vec<FieldElement> = f.elements().collect();
            (0..t)
                .map(|mut idx| {
                    let values: Vec<FieldElement> = free
                        .iter()
                        .map(|_| {
                            let x = elems[(idx % elems.len() as u64) as usize].clone();
                            idx /= elems.len() as u64;
                            x
                        })
                        .collect();
                    build(p.n, f, &free, &values)
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            (0u64..1 << free.len())
                .map(|mask| {
                    let values: Vec<FieldElement> = (0..free.len())
                        .map(|b| if mask >> b & 1 == 1 { f.random_nonzero(&mut rng) } else { f.zero() })
                        .collect();
                    build(p.n, f, &free, &values)
                })
                .collect()
        }
    }
}

/// Degree-2 type of a set and whether its structure matches the type:
/// (0,0) associative and not simple; one zero: neither; both nonzero:
/// simple, associative iff c121 = c212.
fn degree_two_type(c: &SkewSet) -> (&'static str, bool) {
    let (x, y) = (c.get(1, 2, 1), c.get(2, 1, 2));
    let simple = is_simple(c).simple;
    let assoc = is_associative(c).associative;
    match (x.is_zero(), y.is_zero()) {
        (true, true) => ("zero_zero", assoc && !simple),
        (true, false) | (false, true) => ("one_zero", !assoc && !simple),
        (false, false) => ("nonzero_nonzero", simple && assoc == (x == y)),
    }
}

pub fn run(p: &FuzzParams) -> FuzzOutcome {
    let inputs: Vec<(u64, SkewSet)> = if p.exhaustive {
        exhaustive_inputs(p).into_iter().enumerate().map(|(i, c)| (instance_seed(p.seed, i as u64), c)).collect()
    } else {
        (0..p.count as u64)
            .map(|i| {
                let s = instance_seed(p.seed, i);
                (s, SkewSet::random(p.n, &p.field, p.density, s))
            })
            .collect()
    };
    let outcomes: Vec<Result<(), &'static str>> = inputs.par_iter().map(|(s, c)| check(c, *s, p.cap)).collect();
    let mut classification = None;
    let mut type_failure = None;
    if p.n == 2 {
        let mut counts = serde_json::Map::new();
        for (idx, (_, c)) in inputs.iter().enumerate() {
            let (kind, ok) = degree_two_type(c);
            let entry = counts.entry(kind).or_insert_with(|| json!({"count": 0, "associative": 0, "simple": 0}));
            entry["count"] = json!(entry["count"].as_u64().unwrap() + 1);
            if is_associative(c).associative {
                entry["associative"] = json!(entry["associative"].as_u64().unwrap() + 1);
            }
            if is_simple(c).simple {
                entry["simple"] = json!(entry["simple"].as_u64().unwrap() + 1);
            }
            if !ok && type_failure.is_none() {
                type_failure = Some(idx);
            }
        }
        classification = Some(Value::Object(counts));
    }
    let mut per_invariant = serde_json::Map::new();
    for name in INVARIANTS {
        let failures = outcomes.iter().filter(|o| **o == Err(name)).count();
        per_invariant.insert(name.into(), json!(failures));
    }
    let first = outcomes.iter().position(Result::is_err);
    let violation = match (first, type_failure) {
        (Some(i), _) => {
            let name = outcomes[i].unwrap_err();
            let (s, c) = &inputs[i];
            let small = minimize(c, *s, p.cap, name);
            Some((name, json!({"invariant": name, "instance": i, "original": skewset_to_json(c), "reproducer": skewset_to_json(&small)})))
        }
        (None, Some(i)) => Some((
            "degree-two-type",
            json!({"invariant": "degree-two-type", "instance": i, "reproducer": skewset_to_json(&inputs[i].1)}),
        )),
        (None, None) => None,
    };
    let results = json!({
        "n": p.n,
        "field": field_to_json(&p.field),
        "density": if p.exhaustive { Value::Null } else { json!(p.density) },
        "mode": if p.exhaustive { "exhaustive" } else { "random" },
        "checked": inputs.len(),
        "failures": Value::Object(per_invariant),
        "degree_two_types": classification,
        "violation": violation.as_ref().map(|(_, v)| v.clone()),
    });
    FuzzOutcome { results, violation }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, field: Field, count: usize, exhaustive: bool) -> FuzzParams {
        FuzzParams { n, field, density: 0.3, count, seed: 1, exhaustive, cap: 4096 }
    }

    #[test]
    fn random_battery_passes() {
        let out = run(&params(3, Field::rational(), 40, false));
        assert!(out.violation.is_none(), "{:?}", out.results);
        assert_eq!(out.results["checked"], json!(40));
    }

    #[test]
    fn zero_count_passes() {
        let out = run(&params(3, Field::rational(), 0, false));
        assert!(out.violation.is_none());
        assert_eq!(out.results["checked"], json!(0));
    }

    #[test]
    fn exhaustive_degree_two_counts() {
        let out = run(&params(2, Field::gf(5).unwrap(), 0, true));
        assert!(out.violation.is_none());
        let t = &out.results["degree_two_types"];
        assert_eq!(t["zero_zero"]["count"], json!(1));
        assert_eq!(t["one_zero"]["count"], json!(8));
        assert_eq!(t["nonzero_nonzero"]["count"], json!(16));
        assert_eq!(t["nonzero_nonzero"]["associative"], json!(4));
        assert_eq!(t["nonzero_nonzero"]["simple"], json!(16));
    }

    #[test]
    fn exhaustive_patterns_for_degree_three() {
        let out = run(&params(3, Field::gf(7).unwrap(), 0, true));
        assert!(out.violation.is_none());
        assert_eq!(out.results["checked"], json!(4096));
    }

    #[test]
    fn deterministic() {
        let a = run(&params(3, Field::gf(3).unwrap(), 30, false)).results;
        let b = run(&params(3, Field::gf(3).unwrap(), 30, false)).results;
        assert_eq!(a, b);
    }

    #[test]
    fn minimizer_shrinks_a_planted_failure() {
        let f = Field::gf(5).unwrap();
        let c = SkewSet::with_entries(4, &f, &f.from_i64(3), &[((1, 2, 1), f.from_i64(2))]).unwrap();
        let fails = |d: &SkewSet| d.n() >= 2 && *d.get(1, 2, 1) == f.from_i64(2);
        let m = minimize_by(&c, fails);
        assert_eq!(m.n(), 2);
        assert_eq!(*m.get(1, 2, 1), f.from_i64(2));
        assert!(m.get(2, 1, 2).is_one());
    }
}
