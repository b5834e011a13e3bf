//! Skew sets: n×n×n tensors c_{ijk} with c_{iij} = c_{ijj} = 1.
//!
//! Public indices are 1-based. The entry c_{ijk} governs the product
//! e_{ij} e_{jk} = c_{ijk} e_{ik}. Positions with j ∈ {i, k} are forced to 1.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError};
use crate::snf::smith;

/// A 1-based index pair (i, j) naming the matrix unit e_{ij}.
pub type Pos = (usize, usize);
/// A 1-based index triple (i, j, k).
pub type Triple = (usize, usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkewError {
    #[error("not reduced at {0:?}")]
    NotReduced(Vec<Triple>),
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("forcing would zero the reduced positions {0:?}")]
    ReducednessConflict(Vec<Triple>),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("entry ({0},{1},{2}) is forced to 1 and may not be listed")]
    ForcedEntry(usize, usize, usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// True when c_{ijk} is forced to 1 by reducedness.
pub fn is_forced(i: usize, j: usize, k: usize) -> bool {
    j == i || j == k
}

#[derive(Clone, PartialEq, Eq)]
pub struct SkewSet {
    n: usize,
    field: Field,
    /// c_{ijk} at `(i*n + j)*n + k`, 0-based.
    entries: Vec<FieldElement>,
    nonzero: Vec<bool>,
}

impl fmt::Debug for SkewSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SkewSet(n={}, {}", self.n, self.field)?;
        for (i, j, k) in self.triples() {
            if !is_forced(i, j, k) && !self.get(i, j, k).is_one() {
                write!(f, ", c{i}{j}{k}={}", self.get(i, j, k))?;
            }
        }
        write!(f, ")")
    }
}

/// Which entries of a skew set are nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZeroPattern {
    pub n: usize,
    /// `mask[(i*n + j)*n + k]`, 0-based.
    pub mask: Vec<bool>,
}

impl ZeroPattern {
    /// 1-based lookup.
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        let n = self.n;
        self.mask[((i - 1) * n + (j - 1)) * n + (k - 1)]
    }
}

/// Outcome of an equivalence test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    /// γ with γ_{ii} = 1 and c′_{ijk} = γ_{ij} γ_{jk} γ_{ik}^{-1} c_{ijk};
    /// `gamma[i-1][j-1]` holds γ_{ij}.
    Witness(Vec<Vec<FieldElement>>),
    NotEquivalent(NotEquivalentReason),
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Witness(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotEquivalentReason {
    /// The zero patterns differ at this triple.
    Pattern(Triple),
    /// Patterns agree but the multiplicative system has no solution.
    System,
}

impl SkewSet {
    /// Validates a raw tensor given as `raw[i][j][k]` (0-based nesting).
    pub fn validate(field: &Field, raw: Vec<Vec<Vec<FieldElement>>>) -> Result<SkewSet, SkewError> {
        let n = raw.len();
        if n == 0 {
            return Err(SkewError::BadShape("degree must be at least 1".into()));
        }
        let mut flat = Vec::with_capacity(n * n * n);
        for (i, plane) in raw.into_iter().enumerate() {
            if plane.len() != n {
                return Err(SkewError::BadShape(format!("c[{}] has {} rows, expected {n}", i + 1, plane.len())));
            }
            for (j, row) in plane.into_iter().enumerate() {
                if row.len() != n {
                    return Err(SkewError::BadShape(format!("c[{}][{}] has length {}, expected {n}", i + 1, j + 1, row.len())));
                }
                flat.extend(row);
            }
        }
        SkewSet::from_flat(n, field, flat)
    }

    /// From a flat 0-based `(i*n + j)*n + k` array.
    pub fn from_flat(n: usize, field: &Field, entries: Vec<FieldElement>) -> Result<SkewSet, SkewError> {
        if n == 0 || entries.len() != n * n * n {
            return Err(SkewError::BadShape(format!("expected {} entries for n = {n}", n * n * n)));
        }
        if let Some(bad) = entries.iter().find(|e| e.field() != field) {
            return Err(SkewError::FieldMismatch(bad.field().to_string(), field.to_string()));
        }
        let mut violations = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if is_forced(i, j, k) && !entries[(i * n + j) * n + k].is_one() {
                        violations.push((i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        if !violations.is_empty() {
            return Err(SkewError::NotReduced(violations));
        }
        let nonzero = entries.iter().map(|e| !e.is_zero()).collect();
        Ok(SkewSet {
            n,
            field: field.clone(),
            entries,
            nonzero,
        })
    }

    /// Builds c_{ijk} = f(i, j, k) (1-based) and validates.
    pub fn from_fn<F>(n: usize, field: &Field, mut f: F) -> Result<SkewSet, SkewError>
    where
        F: FnMut(usize, usize, usize) -> FieldElement,
    {
        let mut flat = Vec::with_capacity(n * n * n);
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    flat.push(f(i, j, k));
                }
            }
        }
        SkewSet::from_flat(n, field, flat)
    }

    /// Like [`SkewSet::from_fn`], with forced positions set to 1 regardless of `f`.
    pub fn from_fn_reduced<F>(n: usize, field: &Field, mut f: F) -> SkewSet
    where
        F: FnMut(usize, usize, usize) -> FieldElement,
    {
        SkewSet::from_fn(n, field, |i, j, k| if is_forced(i, j, k) { field.one() } else { f(i, j, k) })
            .expect("forced positions are set")
    }

    /// The default value everywhere except the listed non-forced deviations.
    pub fn with_entries(
        n: usize,
        field: &Field,
        default: &FieldElement,
        deviations: &[(Triple, FieldElement)],
    ) -> Result<SkewSet, SkewError> {
        let mut flat = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    flat.push(if is_forced(i, j, k) { field.one() } else { default.clone() });
                }
            }
        }
        for ((i, j, k), v) in deviations {
            let (i, j, k) = (*i, *j, *k);
            if !(1..=n).contains(&i) || !(1..=n).contains(&j) || !(1..=n).contains(&k) {
                return Err(SkewError::BadShape(format!("index ({i},{j},{k}) out of range for n = {n}")));
            }
            if is_forced(i, j, k) {
                return Err(SkewError::ForcedEntry(i, j, k));
            }
            flat[((i - 1) * n + (j - 1)) * n + (k - 1)] = v.clone();
        }
        SkewSet::from_flat(n, field, flat)
    }

    /// The trivial skew set 1_n (standard matrix units).
    pub fn trivial(n: usize, field: &Field) -> SkewSet {
        SkewSet::from_fn(n, field, |_, _, _| field.one()).expect("all ones is reduced")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// c_{ijk}, 1-based.
    pub fn get(&self, i: usize, j: usize, k: usize) -> &FieldElement {
        &self.entries[self.idx(i - 1, j - 1, k - 1)]
    }

    /// c_{ijk}, 0-based.
    pub fn c0(&self, i: usize, j: usize, k: usize) -> &FieldElement {
        &self.entries[self.idx(i, j, k)]
    }

    /// c_{ijk} ≠ 0, 1-based.
    pub fn is_nonzero(&self, i: usize, j: usize, k: usize) -> bool {
        self.nonzero[self.idx(i - 1, j - 1, k - 1)]
    }

    /// c_{ijk} ≠ 0, 0-based.
    pub fn nz0(&self, i: usize, j: usize, k: usize) -> bool {
        self.nonzero[self.idx(i, j, k)]
    }

    /// All 1-based triples in lexicographic order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> {
        let n = self.n;
        (1..=n).flat_map(move |i| (1..=n).flat_map(move |j| (1..=n).map(move |k| (i, j, k))))
    }

    /// Flat 0-based entries.
    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn pattern(&self) -> ZeroPattern {
        ZeroPattern {
            n: self.n,
            mask: self.nonzero.clone(),
        }
    }

    /// All entries nonzero.
    pub fn is_full_support(&self) -> bool {
        self.nonzero.iter().all(|&b| b)
    }

    /// (c⊗c′)_{(i,i′),(j,j′),(k,k′)} = c_{ijk} c′_{i′j′k′} with (i,i′) ↦ (i−1)n′ + i′.
    pub fn tensor(&self, other: &SkewSet) -> Result<SkewSet, SkewError> {
        if self.field != other.field {
            return Err(SkewError::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        let (n, m) = (self.n, other.n);
        let nm = n * m;
        let mut flat = Vec::with_capacity(nm * nm * nm);
        for a in 0..nm {
            for b in 0..nm {
                for c in 0..nm {
                    let x = self.c0(a / m, b / m, c / m);
                    let y = other.c0(a % m, b % m, c % m);
                    flat.push(x * y);
                }
            }
        }
        SkewSet::from_flat(nm, &self.field, flat)
    }

    /// The skew set on the listed 1-based indices (in the given order).
    pub fn restrict(&self, indices: &[usize]) -> SkewSet {
        SkewSet::from_fn(indices.len(), &self.field, |a, b, d| {
            self.get(indices[a - 1], indices[b - 1], indices[d - 1]).clone()
        })
        .expect("restriction of a reduced set is reduced")
    }

    /// c^π with c^π_{ijk} = c_{π(i)π(j)π(k)}; `perm` is 1-based.
    pub fn permute(&self, perm: &[usize]) -> Result<SkewSet, SkewError> {
        check_permutation(perm, self.n)?;
        SkewSet::from_fn(self.n, &self.field, |i, j, k| self.get(perm[i - 1], perm[j - 1], perm[k - 1]).clone())
    }

    /// c′_{ijk} = γ_{ij} γ_{jk} γ_{ik}^{-1} c_{ijk}, for nonzero γ with γ_{ii} = 1.
    pub fn apply_gamma(&self, gamma: &[Vec<FieldElement>]) -> Result<SkewSet, SkewError> {
        let n = self.n;
        if gamma.len() != n || gamma.iter().any(|r| r.len() != n) {
            return Err(SkewError::BadShape("gamma must be n x n".into()));
        }
        let mut flat = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let g = gamma[i][j].checked_mul(&gamma[j][k])?.checked_div(&gamma[i][k])?;
                    flat.push(g.checked_mul(self.c0(i, j, k))?);
                }
            }
        }
        SkewSet::from_flat(n, &self.field, flat)
    }

    /// Decides whether some γ carries `self` to `other`, returning a verified witness.
    pub fn equivalent(&self, other: &SkewSet) -> Result<Equivalence, SkewError> {
        if self.n != other.n {
            return Err(SkewError::DegreeMismatch(self.n, other.n));
        }
        if self.field != other.field {
            return Err(SkewError::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        let n = self.n;
        if let Some(t) = self.triples().find(|&(i, j, k)| self.is_nonzero(i, j, k) != other.is_nonzero(i, j, k)) {
            return Ok(Equivalence::NotEquivalent(NotEquivalentReason::Pattern(t)));
        }
        let f = &self.field;
        // unknowns γ_{ij}, i ≠ j
        let var = |i: usize, j: usize| i * (n - 1) + if j > i { j - 1 } else { j };
        let m = n * (n - 1);
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        let mut rhs: Vec<FieldElement> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if is_forced(i, j, k) || !self.nz0(i, j, k) {
                        continue;
                    }
                    let mut row = vec![BigInt::zero(); m];
                    row[var(i, j)] += 1;
                    row[var(j, k)] += 1;
                    if i != k {
                        row[var(i, k)] -= 1;
                    }
                    rows.push(row);
                    rhs.push(other.c0(i, j, k).checked_div(self.c0(i, j, k))?);
                }
            }
        }
        let mut gamma = vec![vec![f.one(); n]; n];
        if m > 0 && !rows.is_empty() {
            let s = smith(&rows, m);
            let rank = s.rank();
            // transformed right-hand sides β_s = Π_r b_r^{U_{sr}}
            let beta = |s_idx: usize| -> Result<FieldElement, FieldError> {
                let mut acc = f.one();
                for (r, e) in s.u[s_idx].iter().enumerate() {
                    if !e.is_zero() {
                        acc = acc.checked_mul(&rhs[r].pow_bigint(e)?)?;
                    }
                }
                Ok(acc)
            };
            for s_idx in rank..rows.len() {
                if !beta(s_idx)?.is_one() {
                    return Ok(Equivalence::NotEquivalent(NotEquivalentReason::System));
                }
            }
            let mut delta = vec![f.one(); m];
            for (s_idx, d) in s.d.iter().enumerate().take(rank) {
                let b = beta(s_idx)?;
                let d = u64::try_from(d.clone()).expect("elementary divisor fits in u64");
                match b.nth_root(d)? {
                    Some(x) => delta[s_idx] = x,
                    None => return Ok(Equivalence::NotEquivalent(NotEquivalentReason::System)),
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let u = var(i, j);
                    let mut g = f.one();
                    for (s_idx, e) in s.v[u].iter().enumerate() {
                        if !e.is_zero() {
                            g = g.checked_mul(&delta[s_idx].pow_bigint(e)?)?;
                        }
                    }
                    gamma[i][j] = g;
                }
            }
        }
        let image = self.apply_gamma(&gamma)?;
        assert!(image == *other, "equivalence witness failed verification");
        Ok(Equivalence::Witness(gamma))
    }

    /// The skew set making every I_t an ideal: c_{ijk} = 0 when ((i,j) ∈ I_t or
    /// (j,k) ∈ I_t) and (i,k) ∉ I_t for some t, otherwise 1.
    pub fn force_ideals(n: usize, field: &Field, ideals: &[BTreeSet<Pos>]) -> Result<SkewSet, SkewError> {
        for ideal in ideals {
            if let Some(&(i, j)) = ideal.iter().find(|&&(i, j)| !(1..=n).contains(&i) || !(1..=n).contains(&j)) {
                return Err(SkewError::BadShape(format!("position ({i},{j}) out of range for n = {n}")));
            }
        }
        let zeroed = |i: usize, j: usize, k: usize| {
            ideals
                .iter()
                .any(|t| (t.contains(&(i, j)) || t.contains(&(j, k))) && !t.contains(&(i, k)))
        };
        let mut conflicts = Vec::new();
        let mut flat = Vec::with_capacity(n * n * n);
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    let z = zeroed(i, j, k);
                    if z && is_forced(i, j, k) {
                        conflicts.push((i, j, k));
                    }
                    flat.push(if z { field.zero() } else { field.one() });
                }
            }
        }
        if !conflicts.is_empty() {
            return Err(SkewError::ReducednessConflict(conflicts));
        }
        SkewSet::from_flat(n, field, flat)
    }

    /// c_{ijk} = 1 when the block of j is the block of i or of k, else 0.
    /// This contains every within-block triple and every forced triple, and is
    /// the associative choice: the bare "same block or j ∈ {i, k}" pattern
    /// already fails at (e_12 e_21) e_13 for {{1,2},{3}}.
    /// Blocks are lists of 1-based indices.
    pub fn radical_envelope(n: usize, field: &Field, partition: &[Vec<usize>]) -> Result<SkewSet, SkewError> {
        let block = block_map(n, partition)?;
        SkewSet::from_fn(n, field, |i, j, k| {
            if block[j - 1] == block[i - 1] || block[j - 1] == block[k - 1] {
                field.one()
            } else {
                field.zero()
            }
        })
    }

    /// Random reduced skew set: each non-forced entry is zero with probability
    /// `density`, otherwise a random nonzero element.
    pub fn random(n: usize, field: &Field, density: f64, seed: u64) -> SkewSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SkewSet::random_with(n, field, density, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(n: usize, field: &Field, density: f64, rng: &mut R) -> SkewSet {
        let density = density.clamp(0.0, 1.0);
        SkewSet::from_fn_reduced(n, field, |_, _, _| {
            if rng.random_bool(density) {
                field.zero()
            } else {
                field.random_nonzero(rng)
            }
        })
    }
}

/// Checks a 1-based permutation of {1..n}.
pub fn check_permutation(perm: &[usize], n: usize) -> Result<(), SkewError> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(SkewError::BadShape(format!("permutation has length {}, expected {n}", perm.len())));
    }
    for &p in perm {
        if !(1..=n).contains(&p) || seen[p - 1] {
            return Err(SkewError::BadShape(format!("{perm:?} is not a permutation of 1..{n}")));
        }
        seen[p - 1] = true;
    }
    Ok(())
}

/// Block index of each element of {1..n} (0-based result).
pub fn block_map(n: usize, partition: &[Vec<usize>]) -> Result<Vec<usize>, SkewError> {
    let mut block = vec![usize::MAX; n];
    for (b, members) in partition.iter().enumerate() {
        if members.is_empty() {
            return Err(SkewError::BadPartition("empty block".into()));
        }
        for &x in members {
            if !(1..=n).contains(&x) {
                return Err(SkewError::BadPartition(format!("{x} is outside 1..{n}")));
            }
            if block[x - 1] != usize::MAX {
                return Err(SkewError::BadPartition(format!("{x} appears twice")));
            }
            block[x - 1] = b;
        }
    }
    if let Some(x) = block.iter().position(|&b| b == usize::MAX) {
        return Err(SkewError::BadPartition(format!("{} is not covered", x + 1)));
    }
    Ok(block)
}

/// n = 2 skew set with the two free off-diagonal parameters c_{121}, c_{212}
/// (the remaining free entries c_{ijk} with i = k are the only ones for n = 2).
pub fn degree_two(field: &Field, c121: FieldElement, c212: FieldElement) -> SkewSet {
    SkewSet::from_fn_reduced(2, field, |i, _, _| if i == 1 { c121.clone() } else { c212.clone() })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn field(ix: usize) -> Field {
        match ix {
            0 => Field::rational(),
            1 => Field::gf(5).unwrap(),
            2 => Field::gf(13).unwrap(),
            _ => Field::gfq(2, vec![1, 1, 1]).unwrap(),
        }
    }

    fn random_gamma(n: usize, f: &Field, rng: &mut ChaCha8Rng) -> Vec<Vec<FieldElement>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { f.one() } else { f.random_nonzero(rng) }).collect())
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn equivalence_is_an_equivalence(n in 1usize..5, fi in 0usize..4, density in 0.0f64..0.6, seed in any::<u64>()) {
            let f = field(fi);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SkewSet::random_with(n, &f, density, &mut rng);
            let b = a.apply_gamma(&random_gamma(n, &f, &mut rng)).unwrap();
            let c = b.apply_gamma(&random_gamma(n, &f, &mut rng)).unwrap();
            let Equivalence::Witness(ab) = a.equivalent(&b).unwrap() else { panic!("a ~ b") };
            let Equivalence::Witness(bc) = b.equivalent(&c).unwrap() else { panic!("b ~ c") };
            prop_assert!(b.equivalent(&a).unwrap().is_equivalent());
            // witnesses compose entrywise
            let ac: Vec<Vec<FieldElement>> = (0..n).map(|i| (0..n).map(|j| &ab[i][j] * &bc[i][j]).collect()).collect();
            prop_assert_eq!(a.apply_gamma(&ac).unwrap(), c.clone());
            prop_assert!(a.equivalent(&c).unwrap().is_equivalent());
        }

        #[test]
        fn diagonal_scalings_act_trivially(n in 1usize..5, fi in 0usize..4, seed in any::<u64>()) {
            let f = field(fi);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = SkewSet::random_with(n, &f, 0.3, &mut rng);
            let eps: Vec<FieldElement> = (0..n).map(|_| f.random_nonzero(&mut rng)).collect();
            let gamma: Vec<Vec<FieldElement>> = (0..n).map(|i| (0..n).map(|j| &eps[i] / &eps[j]).collect()).collect();
            prop_assert_eq!(c.apply_gamma(&gamma).unwrap(), c);
        }

        #[test]
        fn tensor_laws(n in 1usize..4, m in 1usize..3, l in 1usize..3, fi in 0usize..4, seed in any::<u64>()) {
            let f = field(fi);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SkewSet::random_with(n, &f, 0.3, &mut rng);
            let b = SkewSet::random_with(m, &f, 0.3, &mut rng);
            let c = SkewSet::random_with(l, &f, 0.3, &mut rng);
            let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
            let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
            // the pairing is lexicographic, so both groupings coincide exactly
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(a.tensor(&SkewSet::trivial(1, &f)).unwrap(), a.clone());
            prop_assert_eq!(SkewSet::trivial(1, &f).tensor(&a).unwrap(), a.clone());
            let ab = a.tensor(&b).unwrap();
            for (x, y, z) in ab.triples() {
                let (i, ip) = ((x - 1) / m + 1, (x - 1) % m + 1);
                let (j, jp) = ((y - 1) / m + 1, (y - 1) % m + 1);
                let (k, kp) = ((z - 1) / m + 1, (z - 1) % m + 1);
                prop_assert_eq!(ab.is_nonzero(x, y, z), a.is_nonzero(i, j, k) && b.is_nonzero(ip, jp, kp));
            }
        }

        #[test]
        fn n2_ratio_separates(fi in 0usize..4, seed in any::<u64>()) {
            let f = field(fi);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a1, a2, b1, b2) = (f.random_nonzero(&mut rng), f.random_nonzero(&mut rng), f.random_nonzero(&mut rng), f.random_nonzero(&mut rng));
            let a = degree_two(&f, a1.clone(), a2.clone());
            let b = degree_two(&f, b1.clone(), b2.clone());
            prop_assert_eq!(a.equivalent(&b).unwrap().is_equivalent(), &a1 / &a2 == &b1 / &b2);
        }
    }
}
