//! The frame magma E(c) and the ideal graph Γ_c.
//!
//! Vertices of Γ_c are the positions (i, j); whenever c_{ijk} ≠ 0 there are
//! edges (i,j) → (i,k) and (j,k) → (i,k). Ideals of M_n(F;c) correspond to
//! the forward-closed vertex sets, so the algebra is simple exactly when Γ_c
//! is strongly connected.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::skewset::{Pos, SkewSet, ZeroPattern};

/// Largest degree for which ideal enumeration runs without an explicit cap.
pub const ENUMERATION_BOUND: usize = 6;
/// Cap used when the caller does not supply one.
pub const DEFAULT_IDEAL_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("{0:?} is not an ideal")]
    NotAnIdeal(BTreeSet<Pos>),
    #[error("ideal enumeration for n = {0} needs an explicit cap")]
    TooLarge(usize),
    #[error("position ({0},{1}) out of range")]
    BadPosition(usize, usize),
}

/// The magma on the spans F·e_{ij} plus zero. `None` stands for zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pattern: ZeroPattern,
}

impl Frame {
    pub fn new(c: &SkewSet) -> Frame {
        Frame { pattern: c.pattern() }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    /// (i,j)·(k,l) = (i,l) when j = k and c_{ijl} ≠ 0, else zero.
    pub fn mul(&self, a: Option<Pos>, b: Option<Pos>) -> Option<Pos> {
        let ((i, j), (k, l)) = (a?, b?);
        (j == k && self.pattern.get(i, j, l)).then_some((i, l))
    }

    /// All n²+1 symbols, zero first.
    pub fn symbols(&self) -> Vec<Option<Pos>> {
        let n = self.n();
        std::iter::once(None)
            .chain((1..=n).flat_map(|i| (1..=n).map(move |j| Some((i, j)))))
            .collect()
    }
}

/// Γ_c on vertices `v = (i-1)*n + (j-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealGraph {
    n: usize,
    succ: Vec<Vec<usize>>,
}

/// Strongly connected components with their condensation.
#[derive(Clone, Debug)]
pub struct Components {
    /// Component of each vertex; components are numbered in topological
    /// order of the condensation (edges go from lower to higher numbers).
    pub comp: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    pub succ: Vec<BTreeSet<usize>>,
    pub pred: Vec<BTreeSet<usize>>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplicity {
    pub simple: bool,
    pub scc_count: usize,
    /// A proper nonzero closed set when not simple.
    pub witness: Option<BTreeSet<Pos>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealLattice {
    /// Closed sets sorted by size, then lexicographically.
    pub ideals: Vec<BTreeSet<Pos>>,
    /// True when enumeration stopped at the cap.
    pub truncated: bool,
}

impl IdealGraph {
    pub fn build(c: &SkewSet) -> IdealGraph {
        let n = c.n();
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if c.nz0(i, j, k) {
                        succ[i * n + j].insert(i * n + k);
                        succ[j * n + k].insert(i * n + k);
                    }
                }
            }
        }
        IdealGraph {
            n,
            succ: succ.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.n * self.n
    }

    pub fn vertex(&self, p: Pos) -> usize {
        (p.0 - 1) * self.n + (p.1 - 1)
    }

    pub fn position(&self, v: usize) -> Pos {
        (v / self.n + 1, v % self.n + 1)
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn has_edge(&self, from: Pos, to: Pos) -> bool {
        self.succ[self.vertex(from)].contains(&self.vertex(to))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    fn to_positions(&self, vs: impl IntoIterator<Item = usize>) -> BTreeSet<Pos> {
        vs.into_iter().map(|v| self.position(v)).collect()
    }

    fn check(&self, seed: &BTreeSet<Pos>) -> Result<(), FrameError> {
        match seed.iter().find(|&&(i, j)| !(1..=self.n).contains(&i) || !(1..=self.n).contains(&j)) {
            Some(&(i, j)) => Err(FrameError::BadPosition(i, j)),
            None => Ok(()),
        }
    }

    /// Smallest forward-closed superset of `seed`, by breadth-first search.
    pub fn closure(&self, seed: &BTreeSet<Pos>) -> Result<BTreeSet<Pos>, FrameError> {
        self.check(seed)?;
        let mut seen = vec![false; self.vertex_count()];
        let mut queue: std::collections::VecDeque<usize> = seed.iter().map(|&p| self.vertex(p)).collect();
        for &v in &queue {
            seen[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &w in &self.succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        Ok(self.to_positions((0..self.vertex_count()).filter(|&v| seen[v])))
    }

    pub fn is_closed(&self, set: &BTreeSet<Pos>) -> bool {
        self.check(set).is_ok()
            && set
                .iter()
                .all(|&p| self.succ[self.vertex(p)].iter().all(|&w| set.contains(&self.position(w))))
    }

    /// Tarjan's algorithm, iterative. Components come out in reverse
    /// topological order and are renumbered so that edges increase.
    pub fn components(&self) -> Components {
        let nv = self.vertex_count();
        const UNSEEN: usize = usize::MAX;
        let mut index = vec![UNSEEN; nv];
        let mut low = vec![0usize; nv];
        let mut on_stack = vec![false; nv];
        let mut stack = Vec::new();
        let mut comp = vec![UNSEEN; nv];
        let mut raw_members: Vec<Vec<usize>> = Vec::new();
        let mut next = 0usize;
        for root in 0..nv {
            if index[root] != UNSEEN {
                continue;
            }
            // frames of (vertex, next successor position)
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                if *pos < self.succ[v].len() {
                    let w = self.succ[v][*pos];
                    *pos += 1;
                    if index[w] == UNSEEN {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let id = raw_members.len();
                        let mut members = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            comp[w] = id;
                            members.push(w);
                            if w == v {
                                break;
                            }
                        }
                        members.sort_unstable();
                        raw_members.push(members);
                    }
                }
            }
        }
        // Tarjan emits sinks first; reverse for a topological numbering.
        let count = raw_members.len();
        let comp: Vec<usize> = comp.into_iter().map(|c| count - 1 - c).collect();
        raw_members.reverse();
        let mut succ = vec![BTreeSet::new(); count];
        let mut pred = vec![BTreeSet::new(); count];
        for v in 0..nv {
            for &w in &self.succ[v] {
                let (a, b) = (comp[v], comp[w]);
                if a != b {
                    debug_assert!(a < b, "topological numbering");
                    succ[a].insert(b);
                    pred[b].insert(a);
                }
            }
        }
        Components {
            comp,
            members: raw_members,
            succ,
            pred,
        }
    }

    pub fn simplicity(&self) -> Simplicity {
        let comps = self.components();
        let simple = comps.count() == 1;
        // a sink component is closed; take the one with the smallest vertex
        let witness = (!simple).then(|| {
            let sink = (0..comps.count())
                .filter(|&c| comps.succ[c].is_empty())
                .min_by_key(|&c| comps.members[c][0])
                .expect("a finite DAG has a sink");
            self.to_positions(comps.members[sink].iter().copied())
        });
        Simplicity {
            simple,
            scc_count: comps.count(),
            witness,
        }
    }

    /// All closed sets, as unions of components closed under successors in
    /// the condensation. Components are decided in topological order: one
    /// with an included predecessor is forced in, any other is a free choice.
    pub fn enumerate_closed(&self, cap: usize) -> IdealLattice {
        let comps = self.components();
        let count = comps.count();
        let mut include = vec![false; count];
        let mut out: Vec<BTreeSet<Pos>> = Vec::new();
        let mut truncated = false;

        fn recurse(
            g: &IdealGraph,
            comps: &Components,
            at: usize,
            include: &mut Vec<bool>,
            out: &mut Vec<BTreeSet<Pos>>,
            cap: usize,
            truncated: &mut bool,
        ) {
            if *truncated {
                return;
            }
            if at == comps.count() {
                if out.len() >= cap {
                    *truncated = true;
                    return;
                }
                let vs = (0..comps.count())
                    .filter(|&c| include[c])
                    .flat_map(|c| comps.members[c].iter().copied());
                out.push(g.to_positions(vs));
                return;
            }
            let forced = comps.pred[at].iter().any(|&p| include[p]);
            if !forced {
                include[at] = false;
                recurse(g, comps, at + 1, include, out, cap, truncated);
            }
            include[at] = true;
            recurse(g, comps, at + 1, include, out, cap, truncated);
            include[at] = false;
        }

        recurse(self, &comps, 0, &mut include, &mut out, cap, &mut truncated);
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        IdealLattice { ideals: out, truncated }
    }
}

/// Simplicity of M_n(F;c) with a witness ideal when not simple.
pub fn is_simple(c: &SkewSet) -> Simplicity {
    IdealGraph::build(c).simplicity()
}

/// All ideals (as position sets). Without an explicit cap, refuses n > 6
/// and stops at [`DEFAULT_IDEAL_CAP`].
pub fn enumerate_ideals(c: &SkewSet, cap: Option<usize>) -> Result<IdealLattice, FrameError> {
    let cap = match cap {
        Some(cap) => cap,
        None if c.n() > ENUMERATION_BOUND => return Err(FrameError::TooLarge(c.n())),
        None => DEFAULT_IDEAL_CAP,
    };
    Ok(IdealGraph::build(c).enumerate_closed(cap))
}

/// Support of I·J: positions (i,k) with (i,j) ∈ I, (j,k) ∈ J and c_{ijk} ≠ 0.
pub fn product_support(c: &SkewSet, a: &BTreeSet<Pos>, b: &BTreeSet<Pos>) -> BTreeSet<Pos> {
    let mut out = BTreeSet::new();
    for &(i, j) in a {
        for &(j2, k) in b.range((j, 1)..=(j, c.n())) {
            debug_assert_eq!(j, j2);
            if c.is_nonzero(i, j, k) {
                out.insert((i, k));
            }
        }
    }
    out
}

/// Support of I² and whether it is again an ideal.
pub fn is_ideal_square_ideal(c: &SkewSet, ideal: &BTreeSet<Pos>) -> Result<(BTreeSet<Pos>, bool), FrameError> {
    let g = IdealGraph::build(c);
    if !g.is_closed(ideal) {
        return Err(FrameError::NotAnIdeal(ideal.clone()));
    }
    let sq = product_support(c, ideal, ideal);
    let closed = g.is_closed(&sq);
    Ok((sq, closed))
}

/// The distinct principal ideals closure({(i,j)}), sorted by size then lexicographically.
pub fn principal_ideals(c: &SkewSet) -> Vec<BTreeSet<Pos>> {
    let g = IdealGraph::build(c);
    let n = c.n();
    let mut out: Vec<BTreeSet<Pos>> = (1..=n)
        .flat_map(|i| (1..=n).map(move |j| (i, j)))
        .map(|p| g.closure(&BTreeSet::from([p])).expect("in range"))
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::skewset::degree_two;

    fn set(pairs: &[Pos]) -> BTreeSet<Pos> {
        pairs.iter().copied().collect()
    }

    fn badsquare() -> SkewSet {
        SkewSet::force_ideals(3, &Field::rational(), &[set(&[(1, 2), (1, 3), (2, 3)])]).unwrap()
    }

    /// Oracle: closedness by brute force over all subsets of positions.
    fn brute_closed_sets(c: &SkewSet) -> Vec<BTreeSet<Pos>> {
        let n = c.n();
        let all: Vec<Pos> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
        let mut out = Vec::new();
        for mask in 0u32..(1 << all.len()) {
            let s: BTreeSet<Pos> = all.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &p)| p).collect();
            // closed under multiplication by any matrix unit on either side
            let ok = s.iter().all(|&(i, j)| {
                (1..=n).all(|k| (!c.is_nonzero(i, j, k) || s.contains(&(i, k))) && (!c.is_nonzero(k, i, j) || s.contains(&(k, j))))
            });
            if ok {
                out.push(s);
            }
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    #[test]
    fn graph_examples() {
        let f = Field::rational();
        let g = IdealGraph::build(&SkewSet::trivial(2, &f));
        assert!(g.simplicity().simple);
        let zm = degree_two(&f, f.zero(), f.zero());
        let g = IdealGraph::build(&zm);
        for off in [(1, 2), (2, 1)] {
            for diag in [(1, 1), (2, 2)] {
                assert!(!g.has_edge(off, diag));
                assert!(g.has_edge(diag, off));
            }
        }
        let g = IdealGraph::build(&badsquare());
        assert!(!g.has_edge((1, 3), (1, 1)) && !g.has_edge((1, 3), (3, 3)));
        assert!(g.edge_count() <= 2 * 27);
    }

    #[test]
    fn closure_examples() {
        let f = Field::rational();
        let g = IdealGraph::build(&SkewSet::trivial(3, &f));
        assert!(g.closure(&BTreeSet::new()).unwrap().is_empty());
        assert_eq!(g.closure(&set(&[(1, 2)])).unwrap().len(), 9);
    }

    #[test]
    fn simplicity_examples() {
        let f = Field::rational();
        let sparse = SkewSet::from_fn_reduced(3, &f, |i, _, k| if i == k { f.one() } else { f.zero() });
        assert!(is_simple(&sparse).simple);
        let case2 = degree_two(&f, f.zero(), f.one());
        let s = is_simple(&case2);
        assert!(!s.simple);
        assert_eq!(s.witness, Some(set(&[(1, 2), (2, 1), (2, 2)])));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let f = Field::gf(3).unwrap();
        for seed in 0..40 {
            let c = SkewSet::random(3, &f, 0.5, seed);
            let lat = enumerate_ideals(&c, None).unwrap();
            assert!(!lat.truncated);
            assert_eq!(lat.ideals, brute_closed_sets(&c), "seed {seed}");
        }
        let zm = degree_two(&f, f.zero(), f.zero());
        let lat = enumerate_ideals(&zm, None).unwrap();
        for s in [set(&[(1, 2), (2, 1)]), set(&[(1, 2)]), set(&[(2, 1)])] {
            assert!(lat.ideals.contains(&s));
        }
        let triv = enumerate_ideals(&SkewSet::trivial(3, &f), None).unwrap();
        assert_eq!(triv.ideals.len(), 2);
    }

    #[test]
    fn cap_and_bound() {
        let f = Field::gf(3).unwrap();
        let zm = SkewSet::radical_envelope(4, &f, &[vec![1], vec![2], vec![3], vec![4]]).unwrap();
        let lat = enumerate_ideals(&zm, Some(3)).unwrap();
        assert!(lat.truncated);
        assert_eq!(lat.ideals.len(), 3);
        let big = SkewSet::trivial(7, &f);
        assert_eq!(enumerate_ideals(&big, None), Err(FrameError::TooLarge(7)));
        assert_eq!(enumerate_ideals(&big, Some(10)).unwrap().ideals.len(), 2);
    }

    #[test]
    fn square_examples() {
        let c = badsquare();
        let i = set(&[(1, 2), (1, 3), (2, 3)]);
        let lat = enumerate_ideals(&c, None).unwrap();
        assert!(lat.ideals.contains(&i));
        assert!(!lat.ideals.contains(&set(&[(1, 3)])));
        assert_eq!(is_ideal_square_ideal(&c, &i).unwrap(), (set(&[(1, 3)]), false));
        let f = Field::rational();
        let zm = degree_two(&f, f.zero(), f.zero());
        assert_eq!(is_ideal_square_ideal(&zm, &set(&[(1, 2), (2, 1)])).unwrap(), (BTreeSet::new(), true));
        assert!(matches!(is_ideal_square_ideal(&c, &set(&[(1, 3), (1, 1)])), Err(FrameError::NotAnIdeal(_))));
    }

    #[test]
    fn frame_table_follows_pattern() {
        let c = badsquare();
        let fr = Frame::new(&c);
        assert_eq!(fr.mul(Some((1, 2)), Some((2, 3))), Some((1, 3)));
        assert_eq!(fr.mul(Some((2, 3)), Some((3, 1))), None);
        assert_eq!(fr.mul(Some((1, 2)), Some((1, 2))), None);
        assert_eq!(fr.mul(None, Some((1, 1))), None);
        assert_eq!(fr.symbols().len(), 10);
    }
}
