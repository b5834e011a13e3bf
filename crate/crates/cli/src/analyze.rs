//! Structure report for one skew set.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use skewmat::frame::{enumerate_ideals, is_simple, principal_ideals, product_support};
use skewmat::json::{field_to_json, skewset_to_json};
use skewmat::skewalgebra::{center, is_associative, nuclei};
use skewmat::skewset::{Pos, SkewSet};
use skewmat::structalg::sigma_of_skew;

use crate::report::{diagonal_summary, positions_json};

/// Ideal lists are printed in full only up to this many sets.
pub const LIST_IDEALS_UP_TO: usize = 64;

/// Largest degree for which σ is computed by linear algebra.
pub const SIGMA_MAX_N: usize = 8;

pub struct Analysis {
    pub value: Value,
    pub truncated: bool,
}

fn sets_json(sets: &[BTreeSet<Pos>]) -> Value {
    Value::Array(sets.iter().map(positions_json).collect())
}

pub fn analyze(c: &SkewSet, cap: usize) -> Analysis {
    let n = c.n();
    let simplicity = is_simple(c);
    let lattice = enumerate_ideals(c, Some(cap)).expect("an explicit cap is always accepted");
    let full: BTreeSet<Pos> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    let idempotent: Vec<BTreeSet<Pos>> = lattice
        .ideals
        .iter()
        .filter(|s| !s.is_empty() && **s != full && product_support(c, s, s) == **s)
        .cloned()
        .collect();
    let assoc = is_associative(c);
    let r = nuclei(c);
    let sigma = (n <= SIGMA_MAX_N).then(|| {
        let s = sigma_of_skew(c);
        Value::Array(
            s.atoms
                .iter()
                .map(|a| json!({"dim": a.dim, "center_dim": a.center_dim, "degree": a.degree}))
                .collect(),
        )
    });
    let value = json!({
        "n": n,
        "field": field_to_json(c.field()),
        "skewset": skewset_to_json(c),
        "simple": simplicity.simple,
        "scc_count": simplicity.scc_count,
        "ideal_count": (!lattice.truncated).then_some(lattice.ideals.len()),
        "ideals_truncated": lattice.truncated,
        "ideals": (!lattice.truncated && lattice.ideals.len() <= LIST_IDEALS_UP_TO).then(|| sets_json(&lattice.ideals)),
        "idempotent_ideals": (!lattice.truncated).then(|| sets_json(&idempotent)),
        "principal_ideals": sets_json(&principal_ideals(c)),
        "associative": assoc.associative,
        "associator_witness": assoc.violation.map(|(i, j, k, l)| json!([i, j, k, l])),
        "nuclei": {
            "left": positions_json(&r.left),
            "middle": positions_json(&r.middle),
            "right": positions_json(&r.right),
            "nucleus": positions_json(&r.nucleus),
        },
        "nucleus": diagonal_summary(n, &r.nucleus),
        "regular": r.regular,
        "s_positions": positions_json(&r.s_positions),
        "radical_positions": positions_json(&r.j_positions),
        "s_blocks": r.s_blocks.as_ref().ok(),
        "atoms": r.atoms,
        "center_dim": center(c).len(),
        "sigma": sigma,
    });
    Analysis {
        value,
        truncated: lattice.truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use skewmat::field::Field;
    use skewmat::skewset::degree_two;

    #[test]
    fn small_reports() {
        let f = Field::rational();
        let a = analyze(&SkewSet::trivial(3, &f), 4096).value;
        assert_eq!(a["simple"], json!(true));
        assert_eq!(a["associative"], json!(true));
        assert_eq!(a["atoms"], json!([3]));
        let z = analyze(&degree_two(&f, f.zero(), f.zero()), 4096).value;
        assert_eq!(z["simple"], json!(false));
        assert_eq!(z["associative"], json!(true));
        assert_eq!(z["atoms"], json!([1, 1]));
        assert_eq!(z["radical_positions"], json!([[1, 2], [2, 1]]));
        let e = analyze(&degree_two(&f, f.zero(), f.from_i64(3)), 4096).value;
        assert_eq!(e["idempotent_ideals"], json!([[[1, 2], [2, 1], [2, 2]]]));
    }

    #[test]
    fn cap_truncates() {
        let f = Field::gf(2).unwrap();
        let c = SkewSet::from_fn_reduced(4, &f, |_, _, _| f.zero());
        let a = analyze(&c, 3);
        assert!(a.truncated);
        assert_eq!(a.value["ideal_count"], Value::Null);
    }
}
