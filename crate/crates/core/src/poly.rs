//! Dense univariate polynomials over a [`Field`].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{is_prime, Field, FieldElement};

/// Root finding over a finite field enumerates the field up to this order.
const ROOT_ENUMERATION_LIMIT: u64 = 1_000_000;

/// Coefficients low to high; no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    coeffs: Vec<FieldElement>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl Poly {
    pub fn new(field: &Field, mut coeffs: Vec<FieldElement>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn from_i64(field: &Field, coeffs: &[i64]) -> Poly {
        Poly::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: &Field) -> Poly {
        Poly::new(field, Vec::new())
    }

    pub fn constant(c: FieldElement) -> Poly {
        let field = c.field().clone();
        Poly::new(&field, vec![c])
    }

    /// `x - r`.
    pub fn linear(r: &FieldElement) -> Poly {
        let field = r.field().clone();
        Poly::new(&field, vec![r.neg(), field.one()])
    }

    pub fn x(field: &Field) -> Poly {
        Poly::new(field, vec![field.zero(), field.one()])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        self.coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(&self.field, (0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(&self.field, (0..n).map(|i| &self.coeff(i) - &other.coeff(i)).collect())
    }

    pub fn scale(&self, s: &FieldElement) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(&self.field, out)
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("polynomial division by zero");
        let inv = d.lead().unwrap().inv().expect("nonzero lead");
        let mut r = self.coeffs.clone();
        let mut q = vec![self.field.zero(); self.coeffs.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let coef = r.last().unwrap() * &inv;
            for (i, dc) in d.coeffs.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &(&coef * dc);
            }
            q[shift] = coef;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        (Poly::new(&self.field, q), Poly::new(&self.field, r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            None => self.clone(),
            Some(l) => self.scale(&l.inv().expect("nonzero lead")),
        }
    }

    /// Monic gcd (zero when both inputs are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &self.field.from_i64(i as i64))
            .collect();
        Poly::new(&self.field, coeffs)
    }

    /// gcd(f, f') = 1. Exact over perfect fields, which all supported fields are.
    pub fn is_squarefree(&self) -> bool {
        if self.degree().unwrap_or(0) == 0 {
            return !self.is_zero();
        }
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, mut e: u64, m: &Poly) -> Poly {
        let mut acc = Poly::constant(self.field.one()).rem(m);
        let mut base = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    /// The distinct roots lying in the coefficient field, sorted by index for
    /// finite fields and by value over Q.
    pub fn roots(&self) -> Vec<FieldElement> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let mut out = if self.field.is_rational() {
            rational_roots(self)
        } else {
            finite_roots(self)
        };
        out.sort_by(|a, b| match (a.as_rational(), b.as_rational()) {
            (Some(x), Some(y)) => x.cmp(y),
            _ => a.index().cmp(&b.index()),
        });
        out.dedup();
        out
    }

    /// Irreducibility for polynomials of degree at most 3, where it is
    /// equivalent to having no root in the field. `None` above degree 3.
    pub fn is_irreducible_low_degree(&self) -> Option<bool> {
        match self.degree()? {
            0 => Some(false),
            1 => Some(true),
            2 | 3 => Some(self.roots().is_empty()),
            _ => None,
        }
    }
}

fn finite_roots(f: &Poly) -> Vec<FieldElement> {
    let field = f.field().clone();
    let q = field.order().expect("finite field");
    if q <= ROOT_ENUMERATION_LIMIT {
        return field.elements().filter(|x| f.eval(x).is_zero()).collect();
    }
    // product of the distinct linear factors: gcd(f, x^q - x)
    let x = Poly::x(&field);
    let g = f.gcd(&x.pow_mod(q, f).sub(&x));
    let mut rng = ChaCha8Rng::seed_from_u64(0x7007);
    let mut out = Vec::new();
    split_linear(&g, &mut rng, &mut out);
    out
}

/// Equal-degree splitting of a product of distinct linear factors.
fn split_linear(g: &Poly, rng: &mut ChaCha8Rng, out: &mut Vec<FieldElement>) {
    let field = g.field().clone();
    match g.degree() {
        None | Some(0) => return,
        Some(1) => {
            let g = g.monic();
            out.push(g.coeff(0).neg());
            return;
        }
        _ => {}
    }
    let q = field.order().unwrap();
    let p = field.characteristic();
    loop {
        let a = field.random(rng);
        let t = Poly::new(&field, vec![a, field.one()]);
        let h = if p == 2 {
            // trace map t + t^2 + ... + t^(2^(k-1)) mod g
            let mut acc = Poly::zero(&field);
            let mut cur = t.rem(g);
            for _ in 0..field.degree() {
                acc = acc.add(&cur);
                cur = cur.mul(&cur).rem(g);
            }
            acc
        } else {
            t.pow_mod((q - 1) / 2, g).sub(&Poly::constant(field.one()))
        };
        let d = g.gcd(&h);
        let dd = d.degree().unwrap_or(0);
        if dd > 0 && Some(dd) < g.degree() {
            let other = g.divrem(&d).0;
            split_linear(&d, rng, out);
            split_linear(&other, rng, out);
            return;
        }
    }
}

/// Rational roots: make the polynomial squarefree with integer coefficients,
/// find its roots modulo a good prime l, Hensel-lift them modulo l^N, and
/// recover candidates by rational reconstruction. Every rational root a/b
/// has |a| <= |f_0| and |b| <= |f_d|, so l^N > 2 |f_0| |f_d| makes the
/// reconstruction unique; candidates are confirmed by exact evaluation.
fn rational_roots(f: &Poly) -> Vec<FieldElement> {
    let field = f.field().clone();
    let mut f = f.divrem(&f.gcd(&f.derivative())).0;
    let mut out = Vec::new();
    // strip the root 0
    if f.coeff(0).is_zero() {
        out.push(field.zero());
        let shifted = f.coeffs()[1..].to_vec();
        f = Poly::new(&field, shifted);
    }
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let ints = integer_coeffs(&f);
    let a0 = ints[0].abs();
    let ad = ints.last().unwrap().abs();
    let bound = BigInt::from(2) * &a0 * &ad;

    // a prime that keeps the degree and the squarefreeness
    let mut l = 1009u64;
    let gl = loop {
        l += 2;
        if !is_prime(l) {
            continue;
        }
        let lb = BigInt::from(l);
        if (ints.last().unwrap() % &lb).is_zero() {
            continue;
        }
        let fl = Field::gf(l).unwrap();
        let g = Poly::new(&fl, ints.iter().map(|c| fl.from_bigint(c)).collect());
        if g.is_squarefree() {
            break g;
        }
    };
    let lb = BigInt::from(l);
    let dints = int_derivative(&ints);
    for r in gl.field().elements().filter(|x| gl.eval(x).is_zero()) {
        // Newton iteration doubles the l-adic precision each step
        let mut root = BigInt::from(r.index().unwrap());
        let mut modulus = lb.clone();
        while modulus <= bound {
            modulus = &modulus * &modulus;
            let val = eval_int(&ints, &root).mod_floor(&modulus);
            let der = eval_int(&dints, &root).mod_floor(&modulus);
            let Some(inv) = mod_inverse(&der, &modulus) else { break };
            root = (&root - val * inv).mod_floor(&modulus);
        }
        if let Some((a, b)) = rational_reconstruct(&root, &modulus) {
            let cand = field.from_rational(&BigRational::new(a, b)).unwrap();
            if f.eval(&cand).is_zero() {
                out.push(cand);
            }
        }
    }
    out
}

/// Integer coefficients proportional to a polynomial over Q.
fn integer_coeffs(f: &Poly) -> Vec<BigInt> {
    let rats: Vec<BigRational> = f.coeffs().iter().map(|c| c.as_rational().unwrap().clone()).collect();
    let lcm = rats.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = rats.iter().map(|r| (r * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    ints.into_iter().map(|c| c / &g).collect()
}

fn int_derivative(ints: &[BigInt]) -> Vec<BigInt> {
    ints.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

fn eval_int(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Finds a/b with a = b*r mod m, |a|, |b| <= sqrt(m/2).
fn rational_reconstruct(r: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let half = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > half {
        let q = &r0 / &r1;
        (r0, r1) = (r1.clone(), &r0 - &q * &r1);
        (t0, t1) = (t1.clone(), &t0 - &q * &t1);
    }
    if t1.is_zero() || t1.abs() > half {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(c: &[i64]) -> Poly {
        Poly::from_i64(&Field::rational(), c)
    }

    #[test]
    fn division_identity() {
        let a = qp(&[1, 2, 3, 4]);
        let b = qp(&[-1, 0, 2]);
        let (q, r) = a.divrem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn rational_roots_found_exactly() {
        // (2x - 3)(x + 5)(x^2 + 1) x
        let f = qp(&[-3, 2]).mul(&qp(&[5, 1])).mul(&qp(&[1, 0, 1])).mul(&qp(&[0, 1]));
        let q = Field::rational();
        assert_eq!(f.roots(), vec![q.from_i64(-5), q.zero(), q.parse("3/2").unwrap()]);
        assert!(qp(&[-2, 0, 1]).roots().is_empty());
        assert_eq!(qp(&[-2, 0, 1]).is_irreducible_low_degree(), Some(true));
        assert_eq!(qp(&[1, 0, 0, 0, 1]).is_irreducible_low_degree(), None);
    }

    #[test]
    fn repeated_and_large_rational_roots() {
        let q = Field::rational();
        let r = q.parse("-123457/9973").unwrap();
        let f = Poly::linear(&r).mul(&Poly::linear(&r)).mul(&qp(&[7, 0, 1]));
        assert_eq!(f.roots(), vec![r]);
        assert!(!f.is_squarefree());
    }

    #[test]
    fn finite_field_roots_both_paths() {
        let f = Field::gf(1_000_003).unwrap();
        let roots: Vec<_> = [5i64, 77, 999_999].iter().map(|&r| f.from_i64(r)).collect();
        let mut g = Poly::constant(f.one());
        for r in &roots {
            g = g.mul(&Poly::linear(r));
        }
        g = g.mul(&Poly::from_i64(&f, &[2, 0, 1])); // x^2 + 2, no roots mod 1000003 iff -2 non-residue
        let found = g.roots();
        for r in &roots {
            assert!(found.contains(r));
        }
        for r in &found {
            assert!(g.eval(r).is_zero());
        }
        let f9 = Field::gfq(3, vec![1, 0, 1]).unwrap();
        let x2p1 = Poly::from_i64(&f9, &[1, 0, 1]);
        assert_eq!(x2p1.roots().len(), 2);
    }
}
