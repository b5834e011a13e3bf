//! Exact dense linear algebra over a [`Field`]: matrices, row reduction,
//! kernels, and an incrementally maintained row space.

use std::fmt;

use crate::field::{Field, FieldElement};

pub type Vector = Vec<FieldElement>;

pub fn zero_vector(field: &Field, n: usize) -> Vector {
    vec![field.zero(); n]
}

pub fn is_zero_vector(v: &[FieldElement]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// Builds from rows of equal length `cols`.
    pub fn from_rows(field: &Field, cols: usize, rows: Vec<Vector>) -> Matrix {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        Matrix {
            field: field.clone(),
            rows: nrows,
            cols,
            data,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldElement {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[FieldElement]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn column(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(&self.field, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        let v = out.get(r, c) + &(a * b);
                        out.set(r, c, v);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vector {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(self.field.zero(), |acc, (a, b)| &acc + &(a * b))
            })
            .collect()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut prow = 0;
        for c in 0..m.cols {
            if prow == m.rows {
                break;
            }
            let Some(r) = (prow..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, prow);
            let inv = m.get(prow, c).inv().expect("pivot is nonzero");
            for cc in c..m.cols {
                let v = m.get(prow, cc) * &inv;
                m.set(prow, cc, v);
            }
            for r in 0..m.rows {
                if r == prow || m.get(r, c).is_zero() {
                    continue;
                }
                let f = m.get(r, c).clone();
                for cc in c..m.cols {
                    let sub = &f * m.get(prow, cc);
                    if !sub.is_zero() {
                        let v = m.get(r, cc) - &sub;
                        m.set(r, cc, v);
                    }
                }
            }
            pivots.push(c);
            prow += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of {x : A x = 0}.
    pub fn kernel(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = zero_vector(&self.field, self.cols);
                x[f] = self.field.one();
                for (i, &p) in pivots.iter().enumerate() {
                    x[p] = r.get(i, f).neg();
                }
                x
            })
            .collect()
    }

    /// Some x with A x = b.
    pub fn solve(&self, b: &[FieldElement]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows, "dimension mismatch");
        let mut aug = Matrix::zeros(&self.field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = zero_vector(&self.field, self.cols);
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = red.get(i, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = Matrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, self.field.one());
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(&self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, red.get(r, n + c).clone());
            }
        }
        Some(inv)
    }
}

/// A subspace of F^dim kept as reduced echelon rows, grown one vector at a time.
#[derive(Clone, PartialEq, Eq)]
pub struct RowSpace {
    field: Field,
    dim: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl fmt::Debug for RowSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RowSpace(dim {} in F^{}) {:?}", self.rows.len(), self.dim, self.rows)
    }
}

impl RowSpace {
    pub fn new(field: &Field, dim: usize) -> RowSpace {
        RowSpace {
            field: field.clone(),
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn spanned_by<I: IntoIterator<Item = Vector>>(field: &Field, dim: usize, vectors: I) -> RowSpace {
        let mut s = RowSpace::new(field, dim);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    /// Rows in reduced echelon form, sorted by pivot column.
    pub fn basis(&self) -> &[Vector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// v minus its projection along the pivots; zero iff v is in the span.
    pub fn reduce(&self, v: &[FieldElement]) -> Vector {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let f = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = &*x - &(&f * r);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[FieldElement]) -> bool {
        is_zero_vector(&self.reduce(v))
    }

    /// Adds v; returns true if the rank grew.
    pub fn insert(&mut self, v: Vector) -> bool {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        if self.is_full() {
            return false;
        }
        let mut v = self.reduce(&v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].inv().expect("nonzero pivot");
        v.iter_mut().for_each(|x| *x = &*x * &inv);
        // keep the existing rows reduced against the new pivot
        for row in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, y) in row.iter_mut().zip(&v) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, v);
        true
    }

    pub fn is_subspace_of(&self, other: &RowSpace) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    pub fn intersect(&self, other: &RowSpace) -> RowSpace {
        // x = sum a_i s_i = sum b_j t_j: kernel of [S; -T]^T
        let k = self.rank() + other.rank();
        let mut m = Matrix::zeros(&self.field, self.dim, k);
        for (i, r) in self.rows.iter().enumerate() {
            for c in 0..self.dim {
                m.set(c, i, r[c].clone());
            }
        }
        for (j, r) in other.rows.iter().enumerate() {
            for c in 0..self.dim {
                m.set(c, self.rank() + j, r[c].neg());
            }
        }
        let vecs = m.kernel().into_iter().map(|coef| {
            let mut x = zero_vector(&self.field, self.dim);
            for (a, r) in coef.iter().zip(&self.rows) {
                if a.is_zero() {
                    continue;
                }
                for (xi, ri) in x.iter_mut().zip(r) {
                    *xi = &*xi + &(a * ri);
                }
            }
            x
        });
        RowSpace::spanned_by(&self.field, self.dim, vecs)
    }

    /// Coordinates of v in the echelon basis, if v lies in the span.
    pub fn coordinates(&self, v: &[FieldElement]) -> Option<Vector> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }
}
