//! Elements of M_n(F;c), associators, and the nucleus.
//!
//! The reduced associator of a basis triple is
//! (e_{ij}, e_{jk}, e_{kl})_0 = c_{ijk} c_{ikl} − c_{ijl} c_{jkl},
//! so that (e_{ij}, e_{jk}, e_{kl}) = (e_{ij}, e_{jk}, e_{kl})_0 e_{il}.
//! Nuclei are homogeneous, so membership is decided position by position.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::field::FieldElement;
use crate::frame::{is_simple, IdealGraph};
use crate::linalg::{RowSpace, Vector};
use crate::skewset::{Pos, SkewSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("elements belong to different skew matrix algebras")]
    AlgebraMismatch,
    #[error("bad shape: {0}")]
    BadShape(String),
}

/// An element Σ a_{ij} e_{ij} of M_n(F;c).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewElement {
    c: Arc<SkewSet>,
    /// a_{ij} at `i*n + j`, 0-based.
    coeffs: Vec<FieldElement>,
}

impl SkewElement {
    pub fn zero(c: &Arc<SkewSet>) -> SkewElement {
        SkewElement {
            c: c.clone(),
            coeffs: vec![c.field().zero(); c.n() * c.n()],
        }
    }

    /// Σ e_{ii}.
    pub fn one(c: &Arc<SkewSet>) -> SkewElement {
        let mut a = SkewElement::zero(c);
        for i in 0..c.n() {
            a.coeffs[i * c.n() + i] = c.field().one();
        }
        a
    }

    /// The matrix unit e_{ij}, 1-based.
    pub fn unit(c: &Arc<SkewSet>, i: usize, j: usize) -> SkewElement {
        let mut a = SkewElement::zero(c);
        a.coeffs[(i - 1) * c.n() + (j - 1)] = c.field().one();
        a
    }

    /// From an n×n coefficient matrix (`rows[i-1][j-1]` = a_{ij}).
    pub fn from_matrix(c: &Arc<SkewSet>, rows: Vec<Vec<FieldElement>>) -> Result<SkewElement, AlgebraError> {
        let n = c.n();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(AlgebraError::BadShape(format!("expected a {n}x{n} matrix")));
        }
        let coeffs: Vec<FieldElement> = rows.into_iter().flatten().collect();
        if coeffs.iter().any(|x| x.field() != c.field()) {
            return Err(AlgebraError::AlgebraMismatch);
        }
        Ok(SkewElement { c: c.clone(), coeffs })
    }

    /// From a flat coordinate vector in the order e_{11}, e_{12}, ..., e_{nn}.
    pub fn from_vector(c: &Arc<SkewSet>, v: Vector) -> SkewElement {
        assert_eq!(v.len(), c.n() * c.n(), "coordinate vector length");
        SkewElement { c: c.clone(), coeffs: v }
    }

    pub fn random<R: Rng + ?Sized>(c: &Arc<SkewSet>, rng: &mut R, density: f64) -> SkewElement {
        let f = c.field();
        let coeffs = (0..c.n() * c.n())
            .map(|_| if rng.random_bool(density.clamp(0.0, 1.0)) { f.random(rng) } else { f.zero() })
            .collect();
        SkewElement { c: c.clone(), coeffs }
    }

    pub fn skewset(&self) -> &Arc<SkewSet> {
        &self.c
    }

    /// a_{ij}, 1-based.
    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.coeffs[(i - 1) * self.c.n() + (j - 1)]
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }

    pub fn support(&self) -> BTreeSet<Pos> {
        let n = self.c.n();
        (0..n * n)
            .filter(|&v| !self.coeffs[v].is_zero())
            .map(|v| (v / n + 1, v % n + 1))
            .collect()
    }

    fn same(&self, other: &SkewElement) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.c, &other.c) || self.c == other.c {
            Ok(())
        } else {
            Err(AlgebraError::AlgebraMismatch)
        }
    }

    pub fn add(&self, other: &SkewElement) -> Result<SkewElement, AlgebraError> {
        self.same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(SkewElement { c: self.c.clone(), coeffs })
    }

    pub fn sub(&self, other: &SkewElement) -> Result<SkewElement, AlgebraError> {
        self.same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(SkewElement { c: self.c.clone(), coeffs })
    }

    pub fn scale(&self, s: &FieldElement) -> SkewElement {
        SkewElement {
            c: self.c.clone(),
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    /// Bilinear extension of e_{ij} e_{kl} = δ_{jk} c_{ijl} e_{il}.
    pub fn multiply(&self, other: &SkewElement) -> Result<SkewElement, AlgebraError> {
        self.same(other)?;
        let n = self.c.n();
        let mut out = SkewElement::zero(&self.c);
        for i in 0..n {
            for j in 0..n {
                let a = &self.coeffs[i * n + j];
                if a.is_zero() {
                    continue;
                }
                for l in 0..n {
                    let b = &other.coeffs[j * n + l];
                    if b.is_zero() || !self.c.nz0(i, j, l) {
                        continue;
                    }
                    let t = &(a * b) * self.c.c0(i, j, l);
                    out.coeffs[i * n + l] = &out.coeffs[i * n + l] + &t;
                }
            }
        }
        Ok(out)
    }
}

/// (a b) d − a (b d).
pub fn associator(a: &SkewElement, b: &SkewElement, d: &SkewElement) -> Result<SkewElement, AlgebraError> {
    a.multiply(b)?.multiply(d)?.sub(&a.multiply(&b.multiply(d)?)?)
}

/// c_{ijk} c_{ikl} − c_{ijl} c_{jkl}, 0-based indices.
pub fn reduced_associator(c: &SkewSet, i: usize, j: usize, k: usize, l: usize) -> FieldElement {
    let left = if c.nz0(i, j, k) && c.nz0(i, k, l) { c.c0(i, j, k) * c.c0(i, k, l) } else { c.field().zero() };
    let right = if c.nz0(i, j, l) && c.nz0(j, k, l) { c.c0(i, j, l) * c.c0(j, k, l) } else { c.field().zero() };
    &left - &right
}

/// Zero flags of all reduced associators, indexed `((i*n + j)*n + k)*n + l`.
fn associator_zeros(c: &SkewSet) -> Vec<bool> {
    let n = c.n();
    let mut out = Vec::with_capacity(n * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out.push(reduced_associator(c, i, j, k, l).is_zero());
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Associativity {
    pub associative: bool,
    /// A 1-based (i, j, k, l) with nonzero reduced associator.
    pub violation: Option<(usize, usize, usize, usize)>,
}

pub fn is_associative(c: &SkewSet) -> Associativity {
    let n = c.n();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if !reduced_associator(c, i, j, k, l).is_zero() {
                        return Associativity {
                            associative: false,
                            violation: Some((i + 1, j + 1, k + 1, l + 1)),
                        };
                    }
                }
            }
        }
    }
    Associativity {
        associative: true,
        violation: None,
    }
}

/// Why a set of positions fails to be the relation of a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationViolation {
    Reflexive(usize),
    Symmetric(usize, usize),
    Transitive(usize, usize, usize),
}

/// Reads `rel` as a relation on {1..n}; returns its classes when it is an
/// equivalence, else the first failing axiom.
pub fn relation_partition(n: usize, rel: &BTreeSet<Pos>) -> Result<Vec<Vec<usize>>, RelationViolation> {
    if let Some(i) = (1..=n).find(|&i| !rel.contains(&(i, i))) {
        return Err(RelationViolation::Reflexive(i));
    }
    if let Some(&(i, j)) = rel.iter().find(|&&(i, j)| !rel.contains(&(j, i))) {
        return Err(RelationViolation::Symmetric(i, j));
    }
    for &(i, j) in rel {
        for &(_, k) in rel.range((j, 1)..=(j, n)) {
            if !rel.contains(&(i, k)) {
                return Err(RelationViolation::Transitive(i, j, k));
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut placed = vec![false; n + 1];
    for i in 1..=n {
        if placed[i] {
            continue;
        }
        let block: Vec<usize> = (i..=n).filter(|&j| rel.contains(&(i, j))).collect();
        for &j in &block {
            placed[j] = true;
        }
        blocks.push(block);
    }
    Ok(blocks)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NucleusReport {
    pub left: BTreeSet<Pos>,
    pub middle: BTreeSet<Pos>,
    pub right: BTreeSet<Pos>,
    pub nucleus: BTreeSet<Pos>,
    /// c_{iji} ≠ 0 for every (i, j) in the nucleus.
    pub regular: bool,
    /// Nucleus positions with c_{iji} ≠ 0.
    pub s_positions: BTreeSet<Pos>,
    /// Nucleus positions with c_{iji} = 0 (the radical support).
    pub j_positions: BTreeSet<Pos>,
    /// Blocks of the partition given by S, or why S is not one.
    pub s_blocks: Result<Vec<Vec<usize>>, RelationViolation>,
    /// Block sizes of S, largest first, when S is a partition.
    pub atoms: Option<Vec<usize>>,
    /// Blocks when the nucleus itself is a partition subalgebra.
    pub nucleus_blocks: Result<Vec<Vec<usize>>, RelationViolation>,
}

impl NucleusReport {
    pub fn nucleus_is_partition(&self) -> bool {
        self.nucleus_blocks.is_ok()
    }
}

/// Left, middle and right nuclei, the nucleus, and its S ⊕ J decomposition.
pub fn nuclei(c: &SkewSet) -> NucleusReport {
    let n = c.n();
    let zero = associator_zeros(c);
    let z = |i: usize, j: usize, k: usize, l: usize| zero[((i * n + j) * n + k) * n + l];
    let all_kl = |f: &dyn Fn(usize, usize) -> bool| (0..n).all(|k| (0..n).all(|l| f(k, l)));
    let mut left = BTreeSet::new();
    let mut middle = BTreeSet::new();
    let mut right = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            let p = (i + 1, j + 1);
            if all_kl(&|k, l| z(i, j, k, l)) {
                left.insert(p);
            }
            if all_kl(&|k, l| z(k, i, j, l)) {
                middle.insert(p);
            }
            if all_kl(&|k, l| z(k, l, i, j)) {
                right.insert(p);
            }
        }
    }
    let nucleus: BTreeSet<Pos> = left
        .iter()
        .filter(|p| middle.contains(p) && right.contains(p))
        .copied()
        .collect();
    let (s_positions, j_positions): (BTreeSet<Pos>, BTreeSet<Pos>) =
        nucleus.iter().partition(|&&(i, j)| c.is_nonzero(i, j, i));
    let regular = j_positions.is_empty();
    let s_blocks = relation_partition(n, &s_positions);
    let atoms = s_blocks.as_ref().ok().map(|b| {
        let mut sizes: Vec<usize> = b.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    });
    let nucleus_blocks = relation_partition(n, &nucleus);
    NucleusReport {
        left,
        middle,
        right,
        nucleus,
        regular,
        s_positions,
        j_positions,
        s_blocks,
        atoms,
        nucleus_blocks,
    }
}

/// Whether the nucleus is a partition subalgebra all of whose blocks are
/// simple skew matrix algebras, decided independently of regularity.
pub fn nucleus_is_semisimple_partition(c: &SkewSet, report: &NucleusReport) -> bool {
    match &report.nucleus_blocks {
        Ok(blocks) => blocks.iter().all(|b| is_simple(&c.restrict(b)).simple),
        Err(_) => false,
    }
}

/// A basis of the center {x ∈ span(nucleus) : x e_{kl} = e_{kl} x for all k, l}.
pub fn center(c: &SkewSet) -> Vec<Vector> {
    let n = c.n();
    let f = c.field();
    let nuc: Vec<Pos> = nuclei(c).nucleus.into_iter().collect();
    let arc = Arc::new(c.clone());
    // one equation per (k, l, output coordinate); columns are nucleus positions
    let mut eqs: BTreeMap<(usize, usize, usize), Vec<FieldElement>> = BTreeMap::new();
    for (col, &(i, j)) in nuc.iter().enumerate() {
        let x = SkewElement::unit(&arc, i, j);
        for k in 1..=n {
            for l in 1..=n {
                let e = SkewElement::unit(&arc, k, l);
                let comm = x.multiply(&e).unwrap().sub(&e.multiply(&x).unwrap()).unwrap();
                for (v, val) in comm.coords().iter().enumerate() {
                    if !val.is_zero() {
                        eqs.entry((k, l, v)).or_insert_with(|| vec![f.zero(); nuc.len()])[col] = val.clone();
                    }
                }
            }
        }
    }
    let m = crate::linalg::Matrix::from_rows(f, nuc.len(), eqs.into_values().collect());
    let kernel = if m.nrows() == 0 {
        (0..nuc.len())
            .map(|c0| (0..nuc.len()).map(|r| if r == c0 { f.one() } else { f.zero() }).collect())
            .collect()
    } else {
        m.kernel()
    };
    let vecs = kernel.into_iter().map(|coef: Vector| {
        let mut x = vec![f.zero(); n * n];
        for (a, &(i, j)) in coef.iter().zip(&nuc) {
            x[(i - 1) * n + (j - 1)] = a.clone();
        }
        x
    });
    RowSpace::spanned_by(f, n * n, vecs).basis().to_vec()
}

/// The two-sided ideal generated by `a`, saturating span{a} under left and
/// right multiplication by every matrix unit. Basis in reduced echelon form.
pub fn ideal_generated(a: &SkewElement) -> RowSpace {
    let c = a.skewset();
    let n = c.n();
    let f = c.field();
    let mut space = RowSpace::new(f, n * n);
    let mut queue = Vec::new();
    if space.insert(a.coords().to_vec()) {
        queue.push(a.coords().to_vec());
    }
    let units: Vec<SkewElement> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).map(|(i, j)| SkewElement::unit(c, i, j)).collect();
    while let Some(w) = queue.pop() {
        if space.is_full() {
            break;
        }
        let x = SkewElement::from_vector(c, w);
        for e in &units {
            for y in [e.multiply(&x).unwrap(), x.multiply(e).unwrap()] {
                let v = y.coords().to_vec();
                if space.insert(v.clone()) {
                    queue.push(v);
                }
            }
        }
    }
    space
}

/// span{e_{ij} : (i, j) ∈ positions} as a row space of F^{n²}.
pub fn span_of_positions(c: &SkewSet, positions: &BTreeSet<Pos>) -> RowSpace {
    let n = c.n();
    let f = c.field();
    let vecs = positions.iter().map(|&(i, j)| {
        let mut v = vec![f.zero(); n * n];
        v[(i - 1) * n + (j - 1)] = f.one();
        v
    });
    RowSpace::spanned_by(f, n * n, vecs)
}

/// Homogeneity check for one element: the ideal generated by `a` equals the
/// span of the closure of its support in Γ_c.
pub fn ideal_is_homogeneous(a: &SkewElement) -> bool {
    let c = a.skewset();
    let closure = IdealGraph::build(c).closure(&a.support()).expect("support in range");
    ideal_generated(a) == span_of_positions(c, &closure)
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::field::Field;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(ix: usize) -> crate::field::Field {
        match ix {
            0 => Field::rational(),
            1 => Field::gf(3).unwrap(),
            2 => Field::gf(7).unwrap(),
            _ => Field::gfq(2, vec![1, 1, 1]).unwrap(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn nucleus_facts(n in 1usize..6, fi in 0usize..4, density in 0.0f64..1.0, seed in any::<u64>()) {
            let c = SkewSet::random(n, &field(fi), density, seed);
            let r = nuclei(&c);
            for set in [&r.left, &r.middle, &r.right, &r.nucleus] {
                for i in 1..=n {
                    prop_assert!(set.contains(&(i, i)));
                }
                for &(i, j) in set.iter() {
                    prop_assert_eq!(c.get(i, j, i), c.get(j, i, j));
                    if c.is_nonzero(i, j, i) {
                        prop_assert!(set.contains(&(j, i)));
                    }
                    for k in 1..=n {
                        if set.contains(&(j, k)) && c.is_nonzero(i, j, k) {
                            prop_assert!(set.contains(&(i, k)));
                        }
                    }
                }
            }
            // N = S ⊎ J
            prop_assert!(r.s_positions.is_disjoint(&r.j_positions));
            let union: BTreeSet<Pos> = r.s_positions.union(&r.j_positions).copied().collect();
            prop_assert_eq!(&union, &r.nucleus);
            // regular ⟺ semisimple partition subalgebra
            prop_assert_eq!(r.regular, nucleus_is_semisimple_partition(&c, &r));
            if r.regular {
                prop_assert_eq!(r.atoms.as_ref().map(|a| a.iter().sum::<usize>()), Some(n));
            }
        }

        #[test]
        fn nuclei_are_associative_in_their_slot(n in 1usize..5, density in 0.0f64..1.0, seed in any::<u64>()) {
            let c = SkewSet::random(n, &field(2), density, seed);
            let r = nuclei(&c);
            let ra = |i: usize, j: usize, k: usize, l: usize| reduced_associator(&c, i - 1, j - 1, k - 1, l - 1).is_zero();
            for &(i, j) in &r.left {
                for &(j2, k) in r.left.range((j, 1)..=(j, n)) {
                    for &(_, l) in r.left.range((k, 1)..=(k, n)) {
                        let _ = j2;
                        prop_assert!(ra(i, j, k, l));
                    }
                }
            }
        }

        #[test]
        fn homogeneity(n in 1usize..5, fi in 0usize..4, density in 0.0f64..1.0, seed in any::<u64>()) {
            let c = Arc::new(SkewSet::random(n, &field(fi), density, seed));
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let a = SkewElement::random(&c, &mut rng, 0.4);
            prop_assert!(ideal_is_homogeneous(&a));
        }
    }
}
