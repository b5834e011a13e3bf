//! Finite-dimensional nonassociative algebras given by structure constants.
//!
//! Basis vectors b_0..b_{d-1}; b_a b_b = Σ_e γ(a,b,e) b_e. Elements are
//! coordinate vectors. Subspaces are [`RowSpace`]s of coordinate vectors.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError};
use crate::linalg::{is_zero_vector, zero_vector, Matrix, RowSpace, Vector};
use crate::poly::Poly;
use crate::skewset::SkewSet;

/// A subspace of an algebra, as coordinate rows in reduced echelon form.
pub type Subspace = RowSpace;

/// Random attempts when searching for a generator or a splitting element.
pub const SEARCH_ATTEMPTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructError {
    #[error("algebra is not associative")]
    NotAssociative,
    #[error("trace-form radical needs characteristic 0 or above {dim}, got {p}")]
    CharTooSmall { p: u64, dim: usize },
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("subalgebra is not commutative")]
    NotCommutative,
    #[error("no generator found in {0} attempts")]
    NoGeneratorFound(usize),
    #[error("unit vector does not act as identity")]
    NotUnital,
    #[error("subspace is not a subalgebra")]
    NotSubalgebra,
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct StructAlgebra {
    field: Field,
    dim: usize,
    /// Products b_a b_b at `a*dim + b` as sparse (e, γ(a,b,e)) lists, sorted by e.
    table: Vec<Vec<(usize, FieldElement)>>,
    unit: Vector,
}

impl std::fmt::Debug for StructAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "StructAlgebra(dim {} over {})", self.dim, self.field)
    }
}

impl StructAlgebra {
    /// From sparse constants (a, b, e, γ) (0-based; repeated keys add up) and a unit.
    pub fn from_sparse(
        field: &Field,
        dim: usize,
        constants: impl IntoIterator<Item = (usize, usize, usize, FieldElement)>,
        unit: Vector,
    ) -> Result<StructAlgebra, StructError> {
        let mut acc: Vec<BTreeMap<usize, FieldElement>> = vec![BTreeMap::new(); dim * dim];
        for (a, b, e, v) in constants {
            if a >= dim || b >= dim || e >= dim {
                return Err(StructError::BadShape(format!("constant index ({a},{b},{e}) out of range")));
            }
            if v.field() != field {
                return Err(StructError::FieldMismatch(v.field().to_string(), field.to_string()));
            }
            let slot = acc[a * dim + b].entry(e).or_insert_with(|| field.zero());
            *slot = &*slot + &v;
        }
        if unit.len() != dim {
            return Err(StructError::BadShape("unit has wrong length".into()));
        }
        let table = acc
            .into_iter()
            .map(|m| m.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        let alg = StructAlgebra {
            field: field.clone(),
            dim,
            table,
            unit,
        };
        alg.check_unit()?;
        Ok(alg)
    }

    /// From dense constants `constants[a][b][e]`.
    pub fn from_dense(field: &Field, constants: Vec<Vec<Vector>>, unit: Vector) -> Result<StructAlgebra, StructError> {
        let dim = constants.len();
        let mut sparse = Vec::new();
        for (a, plane) in constants.into_iter().enumerate() {
            if plane.len() != dim {
                return Err(StructError::BadShape("constants must be d x d x d".into()));
            }
            for (b, row) in plane.into_iter().enumerate() {
                if row.len() != dim {
                    return Err(StructError::BadShape("constants must be d x d x d".into()));
                }
                for (e, v) in row.into_iter().enumerate() {
                    if !v.is_zero() {
                        sparse.push((a, b, e, v));
                    }
                }
            }
        }
        StructAlgebra::from_sparse(field, dim, sparse, unit)
    }

    fn check_unit(&self) -> Result<(), StructError> {
        for a in 0..self.dim {
            let ba = self.basis_vector(a);
            if self.mul(&self.unit, &ba) != ba || self.mul(&ba, &self.unit) != ba {
                return Err(StructError::NotUnital);
            }
        }
        Ok(())
    }

    /// Basis e_{ij} at index (i-1)n + (j-1); e_{ij} e_{jl} = c_{ijl} e_{il}.
    pub fn from_skew(c: &SkewSet) -> StructAlgebra {
        let n = c.n();
        let f = c.field();
        let mut constants = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    if c.nz0(i, j, l) {
                        constants.push((i * n + j, j * n + l, i * n + l, c.c0(i, j, l).clone()));
                    }
                }
            }
        }
        let mut unit = zero_vector(f, n * n);
        for i in 0..n {
            unit[i * n + i] = f.one();
        }
        StructAlgebra::from_sparse(f, n * n, constants, unit).expect("skew matrix algebras are unital")
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> &Vector {
        &self.unit
    }

    pub fn basis_vector(&self, a: usize) -> Vector {
        let mut v = zero_vector(&self.field, self.dim);
        v[a] = self.field.one();
        v
    }

    /// γ(a, b, e).
    pub fn constant(&self, a: usize, b: usize, e: usize) -> FieldElement {
        self.table[a * self.dim + b]
            .iter()
            .find(|(k, _)| *k == e)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| self.field.zero())
    }

    /// b_a b_b as a sparse list.
    pub fn basis_product(&self, a: usize, b: usize) -> &[(usize, FieldElement)] {
        &self.table[a * self.dim + b]
    }

    /// All nonzero constants (a, b, e, γ).
    pub fn sparse_constants(&self) -> impl Iterator<Item = (usize, usize, usize, &FieldElement)> {
        let d = self.dim;
        self.table
            .iter()
            .enumerate()
            .flat_map(move |(ab, list)| list.iter().map(move |(e, v)| (ab / d, ab % d, *e, v)))
    }

    pub fn mul(&self, x: &[FieldElement], y: &[FieldElement]) -> Vector {
        let mut out = zero_vector(&self.field, self.dim);
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let s = xa * yb;
                for (e, v) in &self.table[a * self.dim + b] {
                    out[*e] = &out[*e] + &(&s * v);
                }
            }
        }
        out
    }

    /// (xy)z − x(yz).
    pub fn associator(&self, x: &[FieldElement], y: &[FieldElement], z: &[FieldElement]) -> Vector {
        let l = self.mul(&self.mul(x, y), z);
        let r = self.mul(x, &self.mul(y, z));
        l.iter().zip(&r).map(|(a, b)| a - b).collect()
    }

    fn sparse_times_basis(&self, p: &[(usize, FieldElement)], b: usize, sign: &FieldElement, out: &mut BTreeMap<usize, FieldElement>) {
        for (t, pt) in p {
            for (e, v) in &self.table[t * self.dim + b] {
                let slot = out.entry(*e).or_insert_with(|| self.field.zero());
                *slot = &*slot + &(&(pt * v) * sign);
            }
        }
    }

    fn basis_times_sparse(&self, a: usize, p: &[(usize, FieldElement)], sign: &FieldElement, out: &mut BTreeMap<usize, FieldElement>) {
        for (t, pt) in p {
            for (e, v) in &self.table[a * self.dim + t] {
                let slot = out.entry(*e).or_insert_with(|| self.field.zero());
                *slot = &*slot + &(&(pt * v) * sign);
            }
        }
    }

    /// (b_a, b_b, b_c) as a sparse map.
    fn basis_associator(&self, a: usize, b: usize, c: usize) -> BTreeMap<usize, FieldElement> {
        let mut out = BTreeMap::new();
        let one = self.field.one();
        let minus = one.neg();
        self.sparse_times_basis(&self.table[a * self.dim + b], c, &one, &mut out);
        self.basis_times_sparse(a, &self.table[b * self.dim + c], &minus, &mut out);
        out.retain(|_, v| !v.is_zero());
        out
    }

    pub fn is_associative(&self) -> bool {
        let d = self.dim;
        (0..d).all(|a| (0..d).all(|b| (0..d).all(|c| self.basis_associator(a, b, c).is_empty())))
    }

    pub fn is_commutative(&self) -> bool {
        let d = self.dim;
        (0..d).all(|a| (a + 1..d).all(|b| self.table[a * d + b] == self.table[b * d + a]))
    }

    /// Kernel of the constraint rows: all x with Σ_e row[e] x_e = 0.
    fn solve_constraints(&self, constraints: &RowSpace) -> Subspace {
        if constraints.rank() == 0 {
            return RowSpace::spanned_by(&self.field, self.dim, (0..self.dim).map(|a| self.basis_vector(a)));
        }
        let m = Matrix::from_rows(&self.field, self.dim, constraints.basis().to_vec());
        RowSpace::spanned_by(&self.field, self.dim, m.kernel())
    }

    /// Adds the rows "slot-th argument of the associator is x" to `rows`.
    /// slot 0: (x, b_a, b_b); 1: (b_a, x, b_b); 2: (b_a, b_b, x).
    fn nucleus_constraints(&self, slot: usize, rows: &mut RowSpace) {
        let d = self.dim;
        for a in 0..d {
            for b in 0..d {
                if rows.is_full() {
                    return;
                }
                let mut eqs: BTreeMap<usize, Vector> = BTreeMap::new();
                for x in 0..d {
                    let assoc = match slot {
                        0 => self.basis_associator(x, a, b),
                        1 => self.basis_associator(a, x, b),
                        _ => self.basis_associator(a, b, x),
                    };
                    for (f, v) in assoc {
                        eqs.entry(f).or_insert_with(|| zero_vector(&self.field, d))[x] = v;
                    }
                }
                for row in eqs.into_values() {
                    rows.insert(row);
                }
            }
        }
    }

    fn commutator_constraints(&self, rows: &mut RowSpace) {
        let d = self.dim;
        for a in 0..d {
            let mut eqs: BTreeMap<usize, Vector> = BTreeMap::new();
            for x in 0..d {
                let mut diff: BTreeMap<usize, FieldElement> = BTreeMap::new();
                for (e, v) in &self.table[x * d + a] {
                    diff.insert(*e, v.clone());
                }
                for (e, v) in &self.table[a * d + x] {
                    let slot = diff.entry(*e).or_insert_with(|| self.field.zero());
                    *slot = &*slot - v;
                }
                for (f, v) in diff {
                    if !v.is_zero() {
                        eqs.entry(f).or_insert_with(|| zero_vector(&self.field, d))[x] = v;
                    }
                }
            }
            for row in eqs.into_values() {
                rows.insert(row);
            }
        }
    }

    pub fn left_nucleus(&self) -> Subspace {
        let mut rows = RowSpace::new(&self.field, self.dim);
        self.nucleus_constraints(0, &mut rows);
        self.solve_constraints(&rows)
    }

    pub fn middle_nucleus(&self) -> Subspace {
        let mut rows = RowSpace::new(&self.field, self.dim);
        self.nucleus_constraints(1, &mut rows);
        self.solve_constraints(&rows)
    }

    pub fn right_nucleus(&self) -> Subspace {
        let mut rows = RowSpace::new(&self.field, self.dim);
        self.nucleus_constraints(2, &mut rows);
        self.solve_constraints(&rows)
    }

    /// Elements associating with everything in every slot.
    pub fn nucleus_linear(&self) -> Subspace {
        let mut rows = RowSpace::new(&self.field, self.dim);
        for slot in 0..3 {
            self.nucleus_constraints(slot, &mut rows);
        }
        self.solve_constraints(&rows)
    }

    /// Nucleus elements commuting with everything.
    pub fn center(&self) -> Subspace {
        let mut rows = RowSpace::new(&self.field, self.dim);
        for slot in 0..3 {
            self.nucleus_constraints(slot, &mut rows);
        }
        self.commutator_constraints(&mut rows);
        self.solve_constraints(&rows)
    }

    /// {x : x k = k x for every k in `sub`}.
    pub fn centralizer(&self, sub: &Subspace) -> Subspace {
        let mut rows = RowSpace::new(&self.field, self.dim);
        for k in sub.basis() {
            // column x holds b_x k − k b_x
            let cols: Vec<Vector> = (0..self.dim)
                .map(|x| {
                    let bx = self.basis_vector(x);
                    let l = self.mul(&bx, k);
                    let r = self.mul(k, &bx);
                    l.iter().zip(&r).map(|(a, b)| a - b).collect()
                })
                .collect();
            for f in 0..self.dim {
                rows.insert(cols.iter().map(|c| c[f].clone()).collect());
            }
        }
        self.solve_constraints(&rows)
    }

    /// Closed under products and contains the unit.
    pub fn is_subalgebra(&self, sub: &Subspace) -> bool {
        sub.contains(&self.unit)
            && sub
                .basis()
                .iter()
                .all(|x| sub.basis().iter().all(|y| sub.contains(&self.mul(x, y))))
    }

    /// The subalgebra `sub` as an algebra in its echelon basis.
    pub fn subalgebra(&self, sub: &Subspace) -> Result<StructAlgebra, StructError> {
        if !self.is_subalgebra(sub) {
            return Err(StructError::NotSubalgebra);
        }
        let basis = sub.basis();
        let mut constants = Vec::new();
        for (a, x) in basis.iter().enumerate() {
            for (b, y) in basis.iter().enumerate() {
                let coords = sub.coordinates(&self.mul(x, y)).expect("closed under products");
                for (e, v) in coords.into_iter().enumerate() {
                    if !v.is_zero() {
                        constants.push((a, b, e, v));
                    }
                }
            }
        }
        let unit = sub.coordinates(&self.unit).expect("contains the unit");
        StructAlgebra::from_sparse(&self.field, basis.len(), constants, unit)
    }

    /// A / I for a two-sided ideal I, in the basis of non-pivot coordinates.
    pub fn quotient(&self, ideal: &Subspace) -> StructAlgebra {
        let keep: Vec<usize> = (0..self.dim).filter(|c| !ideal.pivots().contains(c)).collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let project = |v: &Vector| -> Vector {
            let r = ideal.reduce(v);
            keep.iter().map(|&c| r[c].clone()).collect()
        };
        let mut constants = Vec::new();
        for (a, &ca) in keep.iter().enumerate() {
            for (b, &cb) in keep.iter().enumerate() {
                let prod = self.mul(&self.basis_vector(ca), &self.basis_vector(cb));
                for (e, v) in project(&prod).into_iter().enumerate() {
                    if !v.is_zero() {
                        constants.push((a, b, e, v));
                    }
                }
            }
        }
        let _ = pos;
        let unit = project(&self.unit);
        StructAlgebra::from_sparse(&self.field, keep.len(), constants, unit).expect("quotient of a unital algebra is unital")
    }

    /// Matrix of L_x : y ↦ x y (columns are images of basis vectors).
    pub fn left_mult_matrix(&self, x: &[FieldElement]) -> Matrix {
        let mut m = Matrix::zeros(&self.field, self.dim, self.dim);
        for b in 0..self.dim {
            let col = self.mul(x, &self.basis_vector(b));
            for (r, v) in col.into_iter().enumerate() {
                m.set(r, b, v);
            }
        }
        m
    }

    /// The Jacobson radical of an associative algebra as the kernel of the
    /// trace form (x, y) ↦ tr(L_{xy}), exact for char 0 or char > dim.
    pub fn jacobson_radical(&self) -> Result<Subspace, StructError> {
        let p = self.field.characteristic();
        if p != 0 && p <= self.dim as u64 {
            return Err(StructError::CharTooSmall { p, dim: self.dim });
        }
        if !self.is_associative() {
            return Err(StructError::NotAssociative);
        }
        let d = self.dim;
        // tr(L_{b_e}) = Σ_f γ(e, f, f)
        let traces: Vec<FieldElement> = (0..d)
            .map(|e| (0..d).fold(self.field.zero(), |acc, f| &acc + &self.constant(e, f, f)))
            .collect();
        let mut gram = Matrix::zeros(&self.field, d, d);
        for a in 0..d {
            for b in 0..d {
                let v = self.table[a * d + b]
                    .iter()
                    .fold(self.field.zero(), |acc, (e, g)| &acc + &(g * &traces[*e]));
                gram.set(a, b, v);
            }
        }
        Ok(RowSpace::spanned_by(&self.field, d, gram.kernel()))
    }

    /// Some power x^k = 0 for each x in a basis of `sub`, with k ≤ dim; and
    /// products of `dim` basis elements vanish.
    pub fn is_nilpotent_subspace(&self, sub: &Subspace) -> bool {
        // sub^k spans products of k elements; iterate span(sub^k · sub)
        let mut power = sub.clone();
        for _ in 0..=self.dim {
            if power.rank() == 0 {
                return true;
            }
            let vecs: Vec<Vector> = power
                .basis()
                .iter()
                .flat_map(|x| sub.basis().iter().map(move |y| (x, y)))
                .map(|(x, y)| self.mul(x, y))
                .collect();
            power = RowSpace::spanned_by(&self.field, self.dim, vecs);
        }
        power.rank() == 0
    }

    /// Two-sided ideal test for a subspace.
    pub fn is_ideal(&self, sub: &Subspace) -> bool {
        sub.basis().iter().all(|x| {
            (0..self.dim).all(|a| {
                let b = self.basis_vector(a);
                sub.contains(&self.mul(x, &b)) && sub.contains(&self.mul(&b, x))
            })
        })
    }

    /// Minimal polynomial of x inside a unital associative subalgebra whose
    /// identity is `one`, from the Krylov sequence one, x, x², ...
    pub fn min_poly_with_unit(&self, x: &[FieldElement], one: &[FieldElement]) -> Poly {
        let f = &self.field;
        let mut powers: Vec<Vector> = vec![one.to_vec()];
        loop {
            let next = self.mul(x, powers.last().unwrap());
            let k = powers.len();
            let mut m = Matrix::zeros(f, self.dim, k);
            for (c, p) in powers.iter().enumerate() {
                for (r, v) in p.iter().enumerate() {
                    m.set(r, c, v.clone());
                }
            }
            if let Some(coef) = m.solve(&next) {
                // x^k = Σ coef_i x^i
                let mut coeffs: Vec<FieldElement> = coef.into_iter().map(|c| c.neg()).collect();
                coeffs.push(f.one());
                return Poly::new(f, coeffs);
            }
            powers.push(next);
        }
    }

    pub fn min_poly(&self, x: &[FieldElement]) -> Poly {
        self.min_poly_with_unit(x, &self.unit.clone())
    }

    /// Integer power x^e with left multiplication, x^0 = `one`.
    fn power_with_unit(&self, x: &[FieldElement], mut e: u64, one: &[FieldElement]) -> Vector {
        let mut acc = one.to_vec();
        let mut base = x.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Evaluates a polynomial at x with x^0 = `one`.
    pub fn eval_poly(&self, p: &Poly, x: &[FieldElement], one: &[FieldElement]) -> Vector {
        let mut acc = zero_vector(&self.field, self.dim);
        for c in p.coeffs().iter().rev() {
            acc = self.mul(&acc, x);
            for (a, o) in acc.iter_mut().zip(one) {
                *a = &*a + &(c * o);
            }
        }
        acc
    }

    /// A (d_A d_B)-dimensional algebra with basis b_a ⊗ b_b at index a d_B + b.
    pub fn tensor(&self, other: &StructAlgebra) -> Result<StructAlgebra, StructError> {
        if self.field != other.field {
            return Err(StructError::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        let (da, db) = (self.dim, other.dim);
        let mut constants = Vec::new();
        for (a1, a2, ea, va) in self.sparse_constants() {
            for (b1, b2, eb, vb) in other.sparse_constants() {
                constants.push((a1 * db + b1, a2 * db + b2, ea * db + eb, va * vb));
            }
        }
        let mut unit = zero_vector(&self.field, da * db);
        for (a, ua) in self.unit.iter().enumerate() {
            for (b, ub) in other.unit.iter().enumerate() {
                unit[a * db + b] = ua * ub;
            }
        }
        StructAlgebra::from_sparse(&self.field, da * db, constants, unit)
    }

    /// The same constants viewed over an extension field.
    pub fn base_change(&self, target: &Field) -> Result<StructAlgebra, StructError> {
        let constants: Result<Vec<_>, FieldError> = self
            .sparse_constants()
            .map(|(a, b, e, v)| target.embed(v).map(|w| (a, b, e, w)))
            .collect();
        let unit: Result<Vector, FieldError> = self.unit.iter().map(|u| target.embed(u)).collect();
        StructAlgebra::from_sparse(target, self.dim, constants?, unit?)
    }

    /// The algebra in a new basis whose vectors are the rows of `p`.
    pub fn change_basis(&self, p: &Matrix) -> Result<StructAlgebra, StructError> {
        let d = self.dim;
        if p.nrows() != d || p.ncols() != d {
            return Err(StructError::BadShape("basis matrix must be d x d".into()));
        }
        // old coordinates v = w P, so w = v P^{-1}
        let pinv = p.inverse().ok_or_else(|| StructError::BadShape("basis matrix is singular".into()))?;
        let pinv_t = pinv.transpose();
        let rows: Vec<Vector> = (0..d).map(|s| p.row(s).to_vec()).collect();
        let mut constants = Vec::new();
        for (s, x) in rows.iter().enumerate() {
            for (t, y) in rows.iter().enumerate() {
                let w = pinv_t.mul_vec(&self.mul(x, y));
                for (e, v) in w.into_iter().enumerate() {
                    if !v.is_zero() {
                        constants.push((s, t, e, v));
                    }
                }
            }
        }
        let unit = pinv_t.mul_vec(&self.unit);
        StructAlgebra::from_sparse(&self.field, d, constants, unit)
    }

    /// γ(a,b,e) = other.γ(map a, map b, map e) for all a, b, e.
    pub fn same_constants_under(&self, other: &StructAlgebra, map: &[usize]) -> bool {
        if self.dim != other.dim || self.field != other.field || map.len() != self.dim {
            return false;
        }
        let d = self.dim;
        let count_self: usize = self.table.iter().map(Vec::len).sum();
        let count_other: usize = other.table.iter().map(Vec::len).sum();
        count_self == count_other
            && (0..d).all(|a| {
                (0..d).all(|b| {
                    self.table[a * d + b]
                        .iter()
                        .all(|(e, v)| other.constant(map[a], map[b], map[*e]) == *v)
                })
            })
    }

    pub fn random_element<R: Rng + ?Sized>(&self, sub: &Subspace, rng: &mut R) -> Vector {
        let mut x = zero_vector(&self.field, self.dim);
        for b in sub.basis() {
            let s = self.field.random(rng);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi = &*xi + &(&s * bi);
            }
        }
        x
    }
}

/// Whether `k` (a commutative associative unital subalgebra with generator
/// `u`) is étale: the minimal polynomial of u has degree dim K and is squarefree.
/// Without `u`, searches random elements of K for one of full degree.
pub fn verify_etale(a: &StructAlgebra, k: &Subspace, u: Option<&Vector>, seed: u64) -> Result<bool, StructError> {
    let basis = k.basis();
    for x in basis {
        for y in basis {
            if a.mul(x, y) != a.mul(y, x) {
                return Err(StructError::NotCommutative);
            }
            for z in basis {
                if !is_zero_vector(&a.associator(x, y, z)) {
                    return Err(StructError::NotAssociative);
                }
            }
        }
    }
    let dim = k.rank();
    let gen = match u {
        Some(u) => u.clone(),
        None => find_generator(a, k, seed)?,
    };
    let m = a.min_poly(&gen);
    Ok(m.degree() == Some(dim) && m.is_squarefree())
}

/// Index in from_skew(c ⊗ c′) of b_{(i,j)} ⊗ b_{(i′,j′)} in
/// from_skew(c) ⊗ from_skew(c′), for degrees n and m.
pub fn skew_tensor_pairing(n: usize, m: usize) -> Vec<usize> {
    let mut map = vec![0; n * n * m * m];
    for i in 0..n {
        for j in 0..n {
            for ip in 0..m {
                for jp in 0..m {
                    map[(i * n + j) * m * m + ip * m + jp] = (i * m + ip) * n * m + (j * m + jp);
                }
            }
        }
    }
    map
}

/// Étale test without a generator, for K commutative and associative over a
/// perfect field: K is étale iff it is reduced. Over GF(q) that is injectivity
/// of the linear map x ↦ x^q; over Q, nondegeneracy of the trace form.
pub fn is_etale_structural(a: &StructAlgebra, k: &Subspace) -> Result<bool, StructError> {
    let kalg = a.subalgebra(k)?;
    if !kalg.is_commutative() {
        return Err(StructError::NotCommutative);
    }
    if !kalg.is_associative() {
        return Err(StructError::NotAssociative);
    }
    let f = kalg.field();
    match f.order() {
        None => Ok(kalg.jacobson_radical()?.rank() == 0),
        Some(q) => {
            let d = kalg.dim();
            let mut m = Matrix::zeros(f, d, d);
            for b in 0..d {
                let img = kalg.power_with_unit(&kalg.basis_vector(b), q, kalg.unit());
                for (r, v) in img.into_iter().enumerate() {
                    m.set(r, b, v);
                }
            }
            Ok(m.rank() == d)
        }
    }
}

/// A random element of K whose minimal polynomial has degree dim K.
pub fn find_generator(a: &StructAlgebra, k: &Subspace, seed: u64) -> Result<Vector, StructError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SEARCH_ATTEMPTS {
        let x = a.random_element(k, &mut rng);
        if a.min_poly(&x).degree() == Some(k.rank()) {
            return Ok(x);
        }
    }
    Err(StructError::NoGeneratorFound(SEARCH_ATTEMPTS))
}

/// K ⊆ A with an optional generator u of K.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub k: Subspace,
    pub generator: Option<Vector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertificateFailure {
    NotSubalgebra,
    NotInNucleus,
    NotEtale,
    NoGenerator,
    DimensionMismatch { dim_a: usize, dim_k: usize },
    NotFaithful { rank: usize },
}

impl CertificateFailure {
    /// Which verification stage failed (1, 2 or 3).
    pub fn stage(&self) -> u8 {
        match self {
            CertificateFailure::NotSubalgebra | CertificateFailure::NotInNucleus => 1,
            CertificateFailure::NotEtale | CertificateFailure::NoGenerator | CertificateFailure::DimensionMismatch { .. } => 2,
            CertificateFailure::NotFaithful { .. } => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub passed: bool,
    pub failure: Option<CertificateFailure>,
}

impl Verdict {
    fn fail(f: CertificateFailure) -> Verdict {
        Verdict {
            passed: false,
            failure: Some(f),
        }
    }
}

/// Stage 1: K is a subalgebra inside Nuc(A). Stage 2: K étale with
/// dim A = (dim K)². Stage 3: a ↦ k a k′ over a basis of K ⊗ K has rank
/// (dim K)², i.e. A is faithful over K ⊗ K. With dim A = (dim K)², stages 2
/// and 3 give minimal faithfulness.
pub fn verify_semiassociative(a: &StructAlgebra, cert: &Certificate, seed: u64) -> Verdict {
    let k = &cert.k;
    if !a.is_subalgebra(k) {
        return Verdict::fail(CertificateFailure::NotSubalgebra);
    }
    if !k.is_subspace_of(&a.nucleus_linear()) {
        return Verdict::fail(CertificateFailure::NotInNucleus);
    }
    let etale = match verify_etale(a, k, cert.generator.as_ref(), seed) {
        // K need not be monogenic over a small finite field
        Err(StructError::NoGeneratorFound(_)) => is_etale_structural(a, k),
        other => other,
    };
    match etale {
        Ok(true) => {}
        Ok(false) | Err(StructError::NotCommutative) | Err(StructError::NotAssociative) => {
            return Verdict::fail(CertificateFailure::NotEtale)
        }
        Err(_) => return Verdict::fail(CertificateFailure::NoGenerator),
    }
    let n = k.rank();
    if a.dim() != n * n {
        return Verdict::fail(CertificateFailure::DimensionMismatch { dim_a: a.dim(), dim_k: n });
    }
    let d = a.dim();
    let mut maps = RowSpace::new(a.field(), d * d);
    for ks in k.basis() {
        for kt in k.basis() {
            let mut flat = Vec::with_capacity(d * d);
            for b in 0..d {
                flat.extend(a.mul(&a.mul(ks, &a.basis_vector(b)), kt));
            }
            maps.insert(flat);
        }
    }
    if maps.rank() != n * n {
        return Verdict::fail(CertificateFailure::NotFaithful { rank: maps.rank() });
    }
    Verdict {
        passed: true,
        failure: None,
    }
}

/// The centralizer of K in A equals K.
pub fn maximal_commutative_check(a: &StructAlgebra, k: &Subspace) -> bool {
    a.centralizer(k) == *k
}

/// One simple component of a semisimple algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub dim: usize,
    pub center_dim: usize,
    /// sqrt(dim / center_dim) when integral.
    pub degree: Option<usize>,
    /// False when the center could not be certified to be a field (over Q,
    /// components whose center has degree above 3).
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct SigmaReport {
    pub nucleus_dim: usize,
    pub radical_dim: usize,
    pub quotient: StructAlgebra,
    /// Atoms sorted by dimension, then center dimension, largest first.
    pub atoms: Vec<Atom>,
}

/// σ(A) = Nuc(A)/Jac(Nuc(A)), with the radical from the trace form.
pub fn sigma(a: &StructAlgebra) -> Result<SigmaReport, StructError> {
    let nuc = a.nucleus_linear();
    let n_alg = a.subalgebra(&nuc)?;
    let jac = n_alg.jacobson_radical()?;
    Ok(sigma_of_quotient(nuc.rank(), jac.rank(), n_alg.quotient(&jac)))
}

/// σ(A) given the nucleus and its radical as subspaces of A.
pub fn sigma_from(a: &StructAlgebra, nucleus: &Subspace, radical: &Subspace) -> Result<SigmaReport, StructError> {
    let n_alg = a.subalgebra(nucleus)?;
    let coords = radical.basis().iter().map(|v| nucleus.coordinates(v).ok_or(StructError::NotSubalgebra));
    let rad = RowSpace::spanned_by(a.field(), nucleus.rank(), coords.collect::<Result<Vec<_>, _>>()?);
    if !n_alg.is_ideal(&rad) {
        return Err(StructError::BadShape("radical is not an ideal of the nucleus".into()));
    }
    Ok(sigma_of_quotient(nucleus.rank(), radical.rank(), n_alg.quotient(&rad)))
}

/// σ of a skew matrix algebra from its combinatorial nucleus and radical.
pub fn sigma_of_skew(c: &SkewSet) -> SigmaReport {
    let report = crate::skewalgebra::nuclei(c);
    let a = StructAlgebra::from_skew(c);
    let nuc = crate::skewalgebra::span_of_positions(c, &report.nucleus);
    let rad = crate::skewalgebra::span_of_positions(c, &report.j_positions);
    sigma_from(&a, &nuc, &rad).expect("the combinatorial radical is an ideal of the nucleus")
}

fn sigma_of_quotient(nucleus_dim: usize, radical_dim: usize, q: StructAlgebra) -> SigmaReport {
    let atoms = semisimple_atoms(&q, 0x5167);
    SigmaReport {
        nucleus_dim,
        radical_dim,
        quotient: q,
        atoms,
    }
}

/// Simple components of a semisimple associative algebra, from the
/// primitive idempotents of its center.
pub fn semisimple_atoms(q: &StructAlgebra, seed: u64) -> Vec<Atom> {
    if q.dim() == 0 {
        return Vec::new();
    }
    let z = q.center();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::new();
    split_center(q, &z, q.unit().clone(), &mut rng, &mut parts);
    let mut atoms: Vec<Atom> = parts
        .into_iter()
        .map(|(e, certified)| {
            let block = RowSpace::spanned_by(q.field(), q.dim(), (0..q.dim()).map(|a| q.mul(&e, &q.basis_vector(a))));
            let center = RowSpace::spanned_by(q.field(), q.dim(), z.basis().iter().map(|x| q.mul(&e, x)));
            let (dim, center_dim) = (block.rank(), center.rank());
            let degree = (dim % center_dim == 0)
                .then(|| dim / center_dim)
                .and_then(|s| {
                    let r = (s as f64).sqrt().round() as usize;
                    (r * r == s).then_some(r)
                });
            Atom {
                dim,
                center_dim,
                degree,
                certified,
            }
        })
        .collect();
    atoms.sort_by_key(|a| std::cmp::Reverse((a.dim, a.center_dim)));
    atoms
}

/// Splits the idempotent `e` of the center into primitive ones.
fn split_center(q: &StructAlgebra, z: &Subspace, e: Vector, rng: &mut ChaCha8Rng, out: &mut Vec<(Vector, bool)>) {
    let f = q.field();
    let piece = RowSpace::spanned_by(f, q.dim(), z.basis().iter().map(|x| q.mul(&e, x)));
    if piece.rank() <= 1 {
        out.push((e, true));
        return;
    }
    if f.is_finite() {
        // Berlekamp subalgebra {x : x^q = x}: its dimension counts the components
        let order = f.order().unwrap();
        let basis = piece.basis().to_vec();
        let r = basis.len();
        let mut m = Matrix::zeros(f, q.dim(), r);
        for (col, w) in basis.iter().enumerate() {
            let img = q.power_with_unit(w, order, &e);
            for (row, (a, b)) in img.iter().zip(w).enumerate() {
                m.set(row, col, a - b);
            }
        }
        let fixed: Vec<Vector> = m
            .kernel()
            .into_iter()
            .map(|coef| {
                let mut x = zero_vector(f, q.dim());
                for (c, w) in coef.iter().zip(&basis) {
                    for (xi, wi) in x.iter_mut().zip(w) {
                        *xi = &*xi + &(c * wi);
                    }
                }
                x
            })
            .collect();
        if fixed.len() <= 1 {
            out.push((e, true));
            return;
        }
        let fixed_space = RowSpace::spanned_by(f, q.dim(), fixed);
        loop {
            let b = q.random_element(&fixed_space, rng);
            let roots = q.min_poly_with_unit(&b, &e).roots();
            if roots.len() >= 2 {
                for ei in lagrange_split(q, &b, &e, &roots) {
                    split_center(q, z, ei, rng, out);
                }
                return;
            }
        }
    }
    // over Q: peel off rational eigenvalues; certify small field components
    for _ in 0..SEARCH_ATTEMPTS {
        let b = q.random_element(&piece, rng);
        let m = q.min_poly_with_unit(&b, &e);
        let roots = m.roots();
        let deg = m.degree().unwrap_or(0);
        if !roots.is_empty() && deg >= 2 {
            let r = &roots[0];
            let g = m.divrem(&Poly::linear(r)).0;
            let scale = g.eval(r).inv().expect("simple root");
            let er: Vector = q.eval_poly(&g, &b, &e).iter().map(|x| x * &scale).collect();
            let rest: Vector = e.iter().zip(&er).map(|(a, b)| a - b).collect();
            split_center(q, z, er, rng, out);
            split_center(q, z, rest, rng, out);
            return;
        }
        if roots.is_empty() && deg == piece.rank() {
            // b generates the piece; it is a field iff m is irreducible
            if let Some(irr) = m.is_irreducible_low_degree() {
                if irr {
                    out.push((e, true));
                    return;
                }
            }
        }
    }
    out.push((e, false));
}

/// e_r = Π_{s≠r} (b − s e)/(r − s) for the listed roots; the remainder
/// (e minus their sum) is appended when nonzero.
fn lagrange_split(q: &StructAlgebra, b: &Vector, e: &Vector, roots: &[FieldElement]) -> Vec<Vector> {
    let f = q.field();
    let mut out = Vec::new();
    let mut total = zero_vector(f, q.dim());
    let m = q.min_poly_with_unit(b, e);
    for r in roots {
        // projector onto the r-component: g(b)/g(r) with g = m/(x - r)
        let g = m.divrem(&Poly::linear(r)).0;
        let scale = g.eval(r).inv().expect("squarefree minimal polynomial");
        let er: Vector = q.eval_poly(&g, b, e).iter().map(|x| x * &scale).collect();
        for (t, x) in total.iter_mut().zip(&er) {
            *t = &*t + x;
        }
        out.push(er);
    }
    let rest: Vector = e.iter().zip(&total).map(|(a, b)| a - b).collect();
    if !is_zero_vector(&rest) {
        out.push(rest);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skewalgebra::{nuclei, span_of_positions};
    use crate::skewset::degree_two;

    /// F[x]/(x²) in basis {1, x}.
    fn dual_numbers(f: &Field) -> StructAlgebra {
        let constants = vec![(0, 0, 0, f.one()), (0, 1, 1, f.one()), (1, 0, 1, f.one())];
        StructAlgebra::from_sparse(f, 2, constants, vec![f.one(), f.zero()]).unwrap()
    }

    fn diag_k(c: &SkewSet) -> Subspace {
        let n = c.n();
        span_of_positions(c, &(1..=n).map(|i| (i, i)).collect())
    }

    #[test]
    fn from_skew_matches_skew_multiplication() {
        use crate::skewalgebra::SkewElement;
        use std::sync::Arc;
        let f = Field::gf(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..10 {
            let c = Arc::new(SkewSet::random(3, &f, 0.4, seed));
            let a = StructAlgebra::from_skew(&c);
            let x = SkewElement::random(&c, &mut rng, 0.7);
            let y = SkewElement::random(&c, &mut rng, 0.7);
            assert_eq!(a.mul(x.coords(), y.coords()), x.multiply(&y).unwrap().coords());
        }
        let one = StructAlgebra::from_skew(&SkewSet::trivial(1, &f));
        assert_eq!(one.dim(), 1);
        assert!(one.is_commutative() && one.is_associative());
    }

    #[test]
    fn nucleus_and_center_of_associative() {
        let f = Field::rational();
        let m2 = StructAlgebra::from_skew(&SkewSet::trivial(2, &f));
        assert!(m2.nucleus_linear().is_full());
        assert_eq!(m2.center().rank(), 1);
    }

    #[test]
    fn radicals() {
        let f = Field::rational();
        assert_eq!(StructAlgebra::from_skew(&SkewSet::trivial(3, &f)).jacobson_radical().unwrap().rank(), 0);
        let dn = dual_numbers(&f);
        let j = dn.jacobson_radical().unwrap();
        assert_eq!(j.basis(), &[vec![f.zero(), f.one()]]);
        assert!(dn.is_ideal(&j) && dn.is_nilpotent_subspace(&j));
        let small = dual_numbers(&Field::gf(2).unwrap());
        assert_eq!(small.jacobson_radical(), Err(StructError::CharTooSmall { p: 2, dim: 2 }));
        let zm = StructAlgebra::from_skew(&degree_two(&f, f.zero(), f.zero()));
        let jz = zm.jacobson_radical().unwrap();
        assert_eq!(jz.rank(), 2);
        assert!(zm.is_nilpotent_subspace(&jz));
        let quot = zm.quotient(&jz);
        assert_eq!(quot.jacobson_radical().unwrap().rank(), 0);
    }

    #[test]
    fn sigma_examples() {
        let f = Field::rational();
        let env = SkewSet::radical_envelope(3, &f, &[vec![1, 2], vec![3]]).unwrap();
        let s = sigma(&StructAlgebra::from_skew(&env)).unwrap();
        let degrees: Vec<Option<usize>> = s.atoms.iter().map(|a| a.degree).collect();
        assert_eq!(degrees, vec![Some(2), Some(1)]);
        assert_eq!(sigma_of_skew(&env).atoms, s.atoms);
        let m2 = sigma(&StructAlgebra::from_skew(&SkewSet::trivial(2, &f))).unwrap();
        assert_eq!(m2.atoms, vec![Atom { dim: 4, center_dim: 1, degree: Some(2), certified: true }]);
    }

    #[test]
    fn sigma_over_small_field_uses_berlekamp_split() {
        let f = Field::gf(2).unwrap();
        // four central idempotents, more than |GF(2)| eigenvalues
        let env = SkewSet::radical_envelope(4, &f, &[vec![1], vec![2], vec![3], vec![4]]).unwrap();
        let s = sigma_of_skew(&env);
        assert_eq!(s.atoms.len(), 4);
        assert!(s.atoms.iter().all(|a| a.dim == 1 && a.certified));
    }

    #[test]
    fn tensor_with_field_and_skew_pairing() {
        let f = Field::gf(5).unwrap();
        let c = SkewSet::random(2, &f, 0.3, 4);
        let d = SkewSet::random(2, &f, 0.3, 5);
        let a = StructAlgebra::from_skew(&c);
        let one = StructAlgebra::from_skew(&SkewSet::trivial(1, &f));
        assert!(a.tensor(&one).unwrap().same_constants_under(&a, &(0..4).collect::<Vec<_>>()));
        let t = a.tensor(&StructAlgebra::from_skew(&d)).unwrap();
        let s = StructAlgebra::from_skew(&c.tensor(&d).unwrap());
        assert!(t.same_constants_under(&s, &skew_tensor_pairing(2, 2)));
    }

    #[test]
    fn base_change_keeps_constants() {
        let f3 = Field::gf(3).unwrap();
        let f9 = Field::gfq(3, vec![1, 0, 1]).unwrap();
        let c = SkewSet::random(2, &f3, 0.3, 8);
        let a = StructAlgebra::from_skew(&c);
        let b = a.base_change(&f9).unwrap();
        for (x, y, e, v) in a.sparse_constants() {
            assert_eq!(b.constant(x, y, e), f9.embed(v).unwrap());
        }
        assert_eq!(b.nucleus_linear().rank(), a.nucleus_linear().rank());
        assert!(a.base_change(&Field::rational()).is_err());
    }

    #[test]
    fn etale_examples() {
        let f = Field::rational();
        let c = SkewSet::trivial(3, &f);
        let a = StructAlgebra::from_skew(&c);
        let k = diag_k(&c);
        let mut u = zero_vector(&f, 9);
        for i in 0..3 {
            u[i * 3 + i] = f.from_i64(i as i64 + 1);
        }
        assert_eq!(verify_etale(&a, &k, Some(&u), 0), Ok(true));
        assert_eq!(verify_etale(&a, &k, None, 0), Ok(true));
        let dn = dual_numbers(&f);
        let all = RowSpace::spanned_by(&f, 2, (0..2).map(|i| dn.basis_vector(i)));
        assert_eq!(verify_etale(&dn, &all, None, 0), Ok(false));
        assert_eq!(is_etale_structural(&dn, &all), Ok(false));
        assert_eq!(is_etale_structural(&a, &k), Ok(true));
        // GF(2)³ is étale but has no generator
        let f2 = Field::gf(2).unwrap();
        let c2 = SkewSet::trivial(3, &f2);
        let a2 = StructAlgebra::from_skew(&c2);
        let k2 = diag_k(&c2);
        assert_eq!(verify_etale(&a2, &k2, None, 0), Err(StructError::NoGeneratorFound(SEARCH_ATTEMPTS)));
        assert_eq!(is_etale_structural(&a2, &k2), Ok(true));
        assert!(verify_semiassociative(&a2, &Certificate { k: k2, generator: None }, 0).passed);
        let zm2 = StructAlgebra::from_skew(&degree_two(&f2, f2.zero(), f2.zero()));
        let kz = RowSpace::spanned_by(&f2, 4, [zm2.unit().clone(), zm2.basis_vector(1)]);
        assert_eq!(is_etale_structural(&zm2, &kz), Ok(false));
    }

    #[test]
    fn certificate_negatives() {
        let f = Field::rational();
        // K = span{1, e12} with c121 ≠ c212: e12 is not in the nucleus
        let c = degree_two(&f, f.from_i64(2), f.one());
        let a = StructAlgebra::from_skew(&c);
        let k = RowSpace::spanned_by(&f, 4, [a.unit().clone(), a.basis_vector(1)]);
        assert_eq!(verify_semiassociative(&a, &Certificate { k, generator: None }, 0).failure, Some(CertificateFailure::NotInNucleus));
        // same K in the zero matrix algebra: in the nucleus but F[x]/(x²)
        let zm = StructAlgebra::from_skew(&degree_two(&f, f.zero(), f.zero()));
        let k = RowSpace::spanned_by(&f, 4, [zm.unit().clone(), zm.basis_vector(1)]);
        assert_eq!(verify_semiassociative(&zm, &Certificate { k, generator: None }, 0).failure, Some(CertificateFailure::NotEtale));
        // K = F·1 in M₂
        let m2 = StructAlgebra::from_skew(&SkewSet::trivial(2, &f));
        let k = RowSpace::spanned_by(&f, 4, [m2.unit().clone()]);
        let v = verify_semiassociative(&m2, &Certificate { k: k.clone(), generator: None }, 0);
        assert_eq!(v.failure, Some(CertificateFailure::DimensionMismatch { dim_a: 4, dim_k: 1 }));
        assert_eq!(v.failure.unwrap().stage(), 2);
        assert!(!maximal_commutative_check(&m2, &k));
    }

    #[test]
    fn diagonal_certificates_pass() {
        for (fi, f) in [Field::rational(), Field::gf(5).unwrap(), Field::gfq(2, vec![1, 1, 1]).unwrap()].iter().enumerate() {
            for seed in 0..8 {
                let c = SkewSet::random(3, f, 0.5, seed + 10 * fi as u64);
                let a = StructAlgebra::from_skew(&c);
                let k = diag_k(&c);
                let v = verify_semiassociative(&a, &Certificate { k: k.clone(), generator: None }, seed);
                assert!(v.passed, "{c:?}: {v:?}");
                assert!(maximal_commutative_check(&a, &k));
                assert_eq!(a.center().rank(), 1);
            }
        }
    }

    #[test]
    fn linear_nuclei_agree_with_combinatorial() {
        let f = Field::gf(3).unwrap();
        for seed in 0..60 {
            let c = SkewSet::random(1 + (seed as usize % 4), &f, 0.5, seed);
            let r = nuclei(&c);
            let a = StructAlgebra::from_skew(&c);
            assert_eq!(a.left_nucleus(), span_of_positions(&c, &r.left));
            assert_eq!(a.middle_nucleus(), span_of_positions(&c, &r.middle));
            assert_eq!(a.right_nucleus(), span_of_positions(&c, &r.right));
            assert_eq!(a.nucleus_linear(), span_of_positions(&c, &r.nucleus));
        }
    }

    #[test]
    fn change_basis_round_trip() {
        let f = Field::rational();
        let c = SkewSet::random(2, &f, 0.2, 3);
        let a = StructAlgebra::from_skew(&c);
        let mut p = Matrix::identity(&f, 4);
        p.set(0, 1, f.from_i64(3));
        p.set(2, 3, f.from_i64(-1));
        let b = a.change_basis(&p).unwrap();
        let back = b.change_basis(&p.inverse().unwrap()).unwrap();
        assert!(back.same_constants_under(&a, &[0, 1, 2, 3]));
    }
}
