//! Smith normal form of integer matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// `u * a * v = diag(d)` with `u`, `v` unimodular and `d[i] | d[i+1]`.
/// `d` has length `min(rows, cols)`; trailing entries may be zero.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub d: Vec<BigInt>,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|x| !x.is_zero()).count()
    }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// row_i += f * row_j
fn row_axpy(m: &mut [Vec<BigInt>], i: usize, j: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    let src = m[j].clone();
    for (x, y) in m[i].iter_mut().zip(&src) {
        *x += f * y;
    }
}

/// col_i += f * col_j
fn col_axpy(m: &mut [Vec<BigInt>], i: usize, j: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let y = row[j].clone();
        row[i] += f * y;
    }
}

fn swap_cols(m: &mut [Vec<BigInt>], i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

pub fn smith(a: &[Vec<BigInt>], cols: usize) -> Smith {
    let rows = a.len();
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let steps = rows.min(cols);
    let mut t = 0;
    while t < steps {
        // pivot: smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut m, t, pj);
        swap_cols(&mut v, t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = -m[i][t].div_floor(&m[t][t]);
                row_axpy(&mut m, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                if !m[i][t].is_zero() {
                    // remainder is smaller than the pivot: make it the pivot
                    m.swap(t, i);
                    u.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = -m[t][j].div_floor(&m[t][t]);
                col_axpy(&mut m, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                if !m[t][j].is_zero() {
                    swap_cols(&mut m, t, j);
                    swap_cols(&mut v, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility: fold any offending row into the pivot row
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&m[i][j] % &m[t][t]).is_zero()));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    row_axpy(&mut m, t, i, &one);
                    row_axpy(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if m[t][t].is_negative() {
            for x in m[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        t += 1;
    }
    let d = (0..steps).map(|i| m[i][i].clone()).collect();
    Smith { u, v, d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        let inner = b.len();
        let cols = b.first().map_or(0, |r| r.len());
        a.iter()
            .map(|r| (0..cols).map(|c| (0..inner).map(|k| &r[k] * &b[k][c]).sum()).collect())
            .collect()
    }

    fn check(a: &[Vec<BigInt>], cols: usize) -> Smith {
        let s = smith(a, cols);
        let prod = mul(&mul(&s.u, a), &s.v);
        for (i, row) in prod.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i == j {
                    assert_eq!(x, &s.d[i]);
                } else {
                    assert!(x.is_zero(), "off-diagonal entry at ({i},{j})");
                }
            }
        }
        for w in s.d.windows(2) {
            assert!(w[1].is_zero() || (&w[1] % &w[0]).is_zero(), "divisibility chain");
        }
        s
    }

    #[test]
    fn textbook_example() {
        let a = mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = check(&a, 3);
        assert_eq!(s.d, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
    }

    #[test]
    fn rank_deficient_and_rectangular() {
        let a = mat(&[&[1, 1, 0], &[0, 1, 1], &[1, 2, 1], &[2, 2, 0]]);
        let s = check(&a, 3);
        assert_eq!(s.rank(), 2);
    }

    proptest! {
        #[test]
        fn random_matrices(rows in 1usize..6, cols in 1usize..6, seed in proptest::collection::vec(-3i64..4, 36)) {
            let a: Vec<Vec<BigInt>> = (0..rows).map(|i| (0..cols).map(|j| BigInt::from(seed[i * 6 + j])).collect()).collect();
            check(&a, cols);
        }
    }
}
