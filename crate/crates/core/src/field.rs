//! Exact scalar fields: the rationals, prime fields GF(p), and extensions
//! GF(p^k) = GF(p)[x]/(m(x)) for a caller-supplied irreducible modulus.
//!
//! A [`Field`] is a cheap handle (an `Arc` around the field data) and every
//! [`FieldElement`] carries the handle of the field it lives in. Fields are
//! interned by their [`FieldSpec`], so two handles built from the same spec
//! share tables and compare by pointer.
//!
//! Elements of GF(p^k) are stored as the integer `a_0 + a_1 p + ... + a_{k-1} p^{k-1}`
//! of their coefficient vector in the power basis of `x`. Fields of order at
//! most 2^16 get discrete-log tables for multiplication.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest order for which multiplication goes through log/exp tables.
const TABLE_LIMIT: u64 = 1 << 16;
/// Root extraction enumerates the field up to this order.
const ENUMERATION_LIMIT: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus must be monic of degree k >= 1 with coefficients below p")]
    BadModulus,
    #[error("modulus {0:?} is reducible over GF({1})")]
    Reducible(Vec<u64>, u64),
    #[error("field order p^k does not fit in 63 bits")]
    TooLarge,
    #[error("frobenius is only defined for finite fields")]
    NotExtensionField,
    #[error("root of zero requested")]
    ZeroInput,
    #[error("cannot parse {0:?} as an element of {1}")]
    Parse(String, String),
    #[error("no embedding of {0} into {1}")]
    NoEmbedding(String, String),
}

/// Which field: the JSON form is `{"kind":"rational"}`, `{"kind":"gfp","p":7}`
/// or `{"kind":"gfq","p":3,"k":2,"modulus":[1,0,1]}` (modulus low to high).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FieldSpec {
    #[serde(rename = "rational")]
    Rational,
    #[serde(rename = "gfp")]
    Prime { p: u64 },
    #[serde(rename = "gfq")]
    Extension { p: u64, k: usize, modulus: Vec<u64> },
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "Q"),
            FieldSpec::Prime { p } => write!(f, "GF({p})"),
            FieldSpec::Extension { p, k, modulus } => write!(f, "GF({p}^{k})[{modulus:?}]"),
        }
    }
}

#[derive(Debug)]
struct LogTables {
    exp: Vec<u64>,
    log: Vec<u32>,
}

#[derive(Debug)]
struct Inner {
    spec: FieldSpec,
    /// Characteristic, 0 for Q.
    p: u64,
    /// Degree over the prime field, 1 for Q and GF(p).
    k: usize,
    /// Order, 0 for Q.
    q: u64,
    /// Monic modulus (length k+1), empty unless an extension.
    modulus: Vec<u64>,
    tables: Option<LogTables>,
}

/// Handle to an exact field.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}
impl Eq for Field {}

impl Hash for Field {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.spec.hash(state)
    }
}

fn interned() -> &'static Mutex<HashMap<FieldSpec, Field>> {
    static CACHE: OnceLock<Mutex<HashMap<FieldSpec, Field>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Field {
    pub fn rational() -> Field {
        Field::from_spec(&FieldSpec::Rational).expect("Q is always valid")
    }

    pub fn gf(p: u64) -> Result<Field, FieldError> {
        Field::from_spec(&FieldSpec::Prime { p })
    }

    /// GF(p)[x]/(modulus); `modulus` is monic, low-to-high.
    pub fn gfq(p: u64, modulus: Vec<u64>) -> Result<Field, FieldError> {
        let k = modulus.len().saturating_sub(1);
        Field::from_spec(&FieldSpec::Extension { p, k, modulus })
    }

    /// Some extension GF(p^k), using the lexicographically first irreducible
    /// monic modulus of degree k.
    pub fn gfq_default(p: u64, k: usize) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::BadModulus);
        }
        checked_order(p, k)?;
        // Enumerate monic polynomials of degree k by their lower coefficients.
        let count = p.pow(k as u32);
        for idx in 0..count {
            let mut modulus = decode(idx, p, k);
            modulus.push(1);
            if modulus[0] == 0 && k > 1 {
                continue;
            }
            if modp::is_irreducible(&modulus, p) {
                return Field::gfq(p, modulus);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Field, FieldError> {
        if let Some(f) = interned().lock().expect("field cache poisoned").get(spec) {
            return Ok(f.clone());
        }
        let inner = build_inner(spec)?;
        let field = Field(Arc::new(inner));
        interned()
            .lock()
            .expect("field cache poisoned")
            .entry(spec.clone())
            .or_insert(field.clone());
        Ok(field)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    /// 0 for Q.
    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> usize {
        self.0.k
    }

    pub fn order(&self) -> Option<u64> {
        self.is_finite().then_some(self.0.q)
    }

    pub fn is_finite(&self) -> bool {
        self.0.p != 0
    }

    pub fn is_rational(&self) -> bool {
        self.0.p == 0
    }

    pub fn is_extension(&self) -> bool {
        matches!(self.0.spec, FieldSpec::Extension { .. })
    }

    /// Modulus coefficients (monic, low to high) for extensions.
    pub fn modulus(&self) -> Option<&[u64]> {
        self.is_extension().then_some(&self.0.modulus[..])
    }

    fn elem(&self, value: Value) -> FieldElement {
        FieldElement {
            field: self.clone(),
            value,
        }
    }

    pub fn zero(&self) -> FieldElement {
        match self.0.p {
            0 => self.elem(Value::Rat(BigRational::zero())),
            _ => self.elem(Value::Fin(0)),
        }
    }

    pub fn one(&self) -> FieldElement {
        match self.0.p {
            0 => self.elem(Value::Rat(BigRational::one())),
            _ => self.elem(Value::Fin(1)),
        }
    }

    pub fn from_i64(&self, v: i64) -> FieldElement {
        match self.0.p {
            0 => self.elem(Value::Rat(BigRational::from_integer(v.into()))),
            p => self.elem(Value::Fin(v.rem_euclid(p as i64) as u64)),
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> FieldElement {
        match self.0.p {
            0 => self.elem(Value::Rat(BigRational::from_integer(v.clone()))),
            p => {
                let r = v.mod_floor(&BigInt::from(p));
                self.elem(Value::Fin(r.to_u64().expect("residue fits")))
            }
        }
    }

    pub fn from_rational(&self, r: &BigRational) -> Result<FieldElement, FieldError> {
        let num = self.from_bigint(r.numer());
        let den = self.from_bigint(r.denom());
        num.checked_div(&den)
    }

    /// Element with the given coefficients in the power basis of the
    /// generator `x` (low to high). For prime fields only `coeffs[0]` counts.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> FieldElement {
        match self.0.p {
            0 => self.from_i64(coeffs.first().copied().unwrap_or(0)),
            p => {
                let k = self.0.k;
                let mut digits = vec![0u64; k];
                for (i, &c) in coeffs.iter().enumerate() {
                    if i < k {
                        digits[i] = c.rem_euclid(p as i64) as u64;
                    } else if c.rem_euclid(p as i64) != 0 {
                        // reduce higher powers of x through the modulus
                        let mut mono = vec![0u64; i + 1];
                        mono[i] = c.rem_euclid(p as i64) as u64;
                        let red = modp::rem(&mono, &self.0.modulus, p);
                        for (d, r) in digits.iter_mut().zip(red.iter().chain(std::iter::repeat(&0))) {
                            *d = (*d + r) % p;
                        }
                    }
                }
                self.elem(Value::Fin(encode(&digits, p)))
            }
        }
    }

    /// The class of `x` in GF(p)[x]/(m); for prime fields this is the root of
    /// the degree-1 modulus, i.e. an element of GF(p).
    pub fn generator(&self) -> FieldElement {
        if self.0.k >= 2 {
            self.from_coeffs(&[0, 1])
        } else if let FieldSpec::Extension { modulus, .. } = &self.0.spec {
            // x = -m_0 for a linear modulus x + m_0
            self.from_i64(-(modulus[0] as i64))
        } else {
            self.one()
        }
    }

    /// Element by index in `0..q` (finite fields only).
    pub fn element(&self, index: u64) -> FieldElement {
        assert!(self.is_finite() && index < self.0.q, "index out of range");
        self.elem(Value::Fin(index))
    }

    /// All elements of a finite field in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        assert!(self.is_finite(), "cannot enumerate Q");
        (0..self.0.q).map(move |i| self.elem(Value::Fin(i)))
    }

    /// A random element. Over Q this is a small fraction a/b with |a| <= 9,
    /// 1 <= b <= 4.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        match self.0.p {
            0 => {
                let n: i64 = rng.random_range(-9..=9);
                let d: i64 = rng.random_range(1..=4);
                self.elem(Value::Rat(BigRational::new(n.into(), d.into())))
            }
            _ => self.elem(Value::Fin(rng.random_range(0..self.0.q))),
        }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let x = self.random(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }

    /// Parses `"a/b"` or `"a"`; over GF(p^k) an integer denotes a constant.
    pub fn parse(&self, s: &str) -> Result<FieldElement, FieldError> {
        let err = || FieldError::Parse(s.to_string(), self.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        self.from_rational(&BigRational::new(n, d)).map_err(|_| err())
    }

    /// Maps `a` into this field along the canonical embedding: identity on
    /// the same field, and the prime subfield into any extension of the same
    /// characteristic.
    pub fn embed(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        if a.field == *self {
            return Ok(a.clone());
        }
        let src = &a.field;
        if src.is_finite() && src.0.p == self.0.p && src.0.k == 1 && !src.is_extension() {
            if let Value::Fin(r) = a.value {
                return Ok(self.elem(Value::Fin(r)));
            }
        }
        if src.is_finite() && src.0.p == self.0.p && src.is_extension() && src.0.k == 1 {
            // GF(p) presented as a degree-1 extension: the element is a residue
            if let Value::Fin(r) = a.value {
                return Ok(self.elem(Value::Fin(r)));
            }
        }
        Err(FieldError::NoEmbedding(src.to_string(), self.to_string()))
    }

    /// The prime field underlying a finite field (Q for Q).
    pub fn prime_field(&self) -> Field {
        match self.0.p {
            0 => Field::rational(),
            p => Field::gf(p).expect("characteristic is prime"),
        }
    }

    // --- raw arithmetic on encoded values of finite fields ---

    fn fin_add(&self, a: u64, b: u64) -> u64 {
        let p = self.0.p;
        if self.0.k == 1 {
            return add_mod(a, b, p);
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.0.k {
            out += add_mod(a % p, b % p, p) * place;
            a /= p;
            b /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    fn fin_neg(&self, a: u64) -> u64 {
        let p = self.0.p;
        if self.0.k == 1 {
            return if a == 0 { 0 } else { p - a };
        }
        let mut a = a;
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.0.k {
            let d = a % p;
            out += (if d == 0 { 0 } else { p - d }) * place;
            a /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    fn fin_mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        let p = self.0.p;
        if self.0.k == 1 {
            return mul_mod(a, b, p);
        }
        if let Some(t) = &self.0.tables {
            let s = t.log[a as usize] as u64 + t.log[b as usize] as u64;
            return t.exp[(s % (self.0.q - 1)) as usize];
        }
        let k = self.0.k;
        let prod = modp::mul(&decode(a, p, k), &decode(b, p, k), p);
        encode(&modp::rem(&prod, &self.0.modulus, p), p)
    }

    fn fin_pow(&self, a: u64, e: u64) -> u64 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        // a^(q-1) = 1 for a != 0
        let e = match e % (self.0.q - 1) {
            0 => self.0.q - 1,
            r => r,
        };
        if let Some(t) = &self.0.tables {
            let s = (t.log[a as usize] as u128 * e as u128) % (self.0.q - 1) as u128;
            return t.exp[s as usize];
        }
        let mut base = a;
        let mut e = e;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.fin_mul(acc, base);
            }
            base = self.fin_mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn fin_inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0);
        if self.0.k == 1 {
            return inv_mod(a, self.0.p);
        }
        if let Some(t) = &self.0.tables {
            let l = t.log[a as usize] as u64;
            return t.exp[((self.0.q - 1 - l) % (self.0.q - 1)) as usize];
        }
        self.fin_pow(a, self.0.q - 2)
    }
}

fn checked_order(p: u64, k: usize) -> Result<u64, FieldError> {
    let q = p.checked_pow(k as u32).ok_or(FieldError::TooLarge)?;
    if q > (1u64 << 62) {
        return Err(FieldError::TooLarge);
    }
    Ok(q)
}

fn build_inner(spec: &FieldSpec) -> Result<Inner, FieldError> {
    match spec {
        FieldSpec::Rational => Ok(Inner {
            spec: spec.clone(),
            p: 0,
            k: 1,
            q: 0,
            modulus: Vec::new(),
            tables: None,
        }),
        &FieldSpec::Prime { p } => {
            if !is_prime(p) {
                return Err(FieldError::NotPrime(p));
            }
            checked_order(p, 1)?;
            Ok(Inner {
                spec: spec.clone(),
                p,
                k: 1,
                q: p,
                modulus: Vec::new(),
                tables: None,
            })
        }
        FieldSpec::Extension { p, k, modulus } => {
            let (p, k) = (*p, *k);
            if !is_prime(p) {
                return Err(FieldError::NotPrime(p));
            }
            if k == 0 || modulus.len() != k + 1 || modulus[k] != 1 || modulus.iter().any(|&c| c >= p) {
                return Err(FieldError::BadModulus);
            }
            let q = checked_order(p, k)?;
            if !modp::is_irreducible(modulus, p) {
                return Err(FieldError::Reducible(modulus.clone(), p));
            }
            let mut inner = Inner {
                spec: spec.clone(),
                p,
                k,
                q,
                modulus: modulus.clone(),
                tables: None,
            };
            if k >= 2 && q <= TABLE_LIMIT {
                inner.tables = Some(build_tables(&inner));
            }
            Ok(inner)
        }
    }
}

fn build_tables(inner: &Inner) -> LogTables {
    let (p, k, q) = (inner.p, inner.k, inner.q);
    let mul = |a: u64, b: u64| encode(&modp::rem(&modp::mul(&decode(a, p, k), &decode(b, p, k), p), &inner.modulus, p), p);
    let factors = prime_factors(q - 1);
    'candidates: for g in 2..q {
        // g is primitive iff g^((q-1)/r) != 1 for every prime r | q-1
        for &r in &factors {
            let mut e = (q - 1) / r;
            let (mut acc, mut base) = (1u64, g);
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul(acc, base);
                }
                base = mul(base, base);
                e >>= 1;
            }
            if acc == 1 {
                continue 'candidates;
            }
        }
        let mut exp = Vec::with_capacity((q - 1) as usize);
        let mut log = vec![0u32; q as usize];
        let mut x = 1u64;
        for i in 0..(q - 1) {
            exp.push(x);
            log[x as usize] = i as u32;
            x = mul(x, g);
        }
        return LogTables { exp, log };
    }
    unreachable!("multiplicative group of a finite field is cyclic")
}

fn decode(mut a: u64, p: u64, k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(a % p);
        a /= p;
    }
    out
}

fn encode(digits: &[u64], p: u64) -> u64 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * p + d)
}

fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, a as i128);
    while new_r != 0 {
        let quo = r / new_r;
        (t, new_t) = (new_t, t - quo * new_t);
        (r, new_r) = (new_r, r - quo * new_r);
    }
    debug_assert_eq!(r, 1, "not invertible");
    t.rem_euclid(p as i128) as u64
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomials over GF(p) as `Vec<u64>`, low to high. Only what the
/// field constructor needs.
pub(crate) mod modp {
    use super::{add_mod, inv_mod, mul_mod, prime_factors};

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = add_mod(out[i + j], mul_mod(x, y, p), p);
            }
        }
        trim(out)
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let m = trim(m.to_vec());
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let shift = r.len() - 1 - dm;
            let coef = mul_mod(*r.last().unwrap(), lead_inv, p);
            for (i, &mc) in m.iter().enumerate() {
                let sub = mul_mod(coef, mc, p);
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
            r = trim(r);
        }
        r
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        if let Some(&lead) = a.last() {
            let inv = inv_mod(lead, p);
            a.iter_mut().for_each(|c| *c = mul_mod(*c, inv, p));
        }
        a
    }

    /// x^(p^t) mod m by repeated p-th powering.
    fn frobenius_power(m: &[u64], p: u64, t: usize) -> Vec<u64> {
        let mut x = rem(&[0, 1], m, p);
        for _ in 0..t {
            x = pow(&x, p, m, p);
        }
        x
    }

    fn pow(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        acc
    }

    /// Rabin's irreducibility test for a monic polynomial of degree k >= 1.
    pub fn is_irreducible(m: &[u64], p: u64) -> bool {
        let m = trim(m.to_vec());
        let k = m.len() - 1;
        if k == 0 {
            return false;
        }
        if k == 1 {
            return true;
        }
        let x = vec![0u64, 1];
        if sub(&frobenius_power(&m, p, k), &x, p) != rem(&[], &m, p) {
            return false;
        }
        for r in prime_factors(k as u64) {
            let h = sub(&frobenius_power(&m, p, k / r as usize), &x, p);
            if gcd(&m, &h, p).len() != 1 {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Value {
    Rat(BigRational),
    Fin(u64),
}

/// An element of a [`Field`], always in canonical form.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    value: Value,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.field == other.field
    }
}
impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.value.hash(state)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Rat(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Value::Fin(v) if self.field.0.k == 1 => write!(f, "{v}"),
            Value::Fin(_) => {
                let coeffs = self.coeffs();
                let mut terms = Vec::new();
                for (i, &c) in coeffs.iter().enumerate().rev() {
                    if c == 0 {
                        continue;
                    }
                    let t = match (i, c) {
                        (0, c) => format!("{c}"),
                        (1, 1) => "x".to_string(),
                        (1, c) => format!("{c}x"),
                        (i, 1) => format!("x^{i}"),
                        (i, c) => format!("{c}x^{i}"),
                    };
                    terms.push(t);
                }
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", terms.join("+"))
                }
            }
        }
    }
}

/// The four field operations, for [`FieldElement::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Rat(r) => r.is_zero(),
            Value::Fin(v) => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Value::Rat(r) => r.is_one(),
            Value::Fin(v) => *v == 1,
        }
    }

    /// The rational value, if this is an element of Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.value {
            Value::Rat(r) => Some(r),
            Value::Fin(_) => None,
        }
    }

    /// Index in `0..q` for finite fields.
    pub fn index(&self) -> Option<u64> {
        match self.value {
            Value::Fin(v) => Some(v),
            Value::Rat(_) => None,
        }
    }

    /// Coefficients in the power basis of the generator (length k) for
    /// finite fields; empty for Q.
    pub fn coeffs(&self) -> Vec<u64> {
        match self.value {
            Value::Fin(v) => decode(v, self.field.0.p, self.field.0.k),
            Value::Rat(_) => Vec::new(),
        }
    }

    /// True when the element lies in the prime subfield.
    pub fn in_prime_field(&self) -> bool {
        match self.value {
            Value::Rat(_) => true,
            Value::Fin(v) => v < self.field.0.p,
        }
    }

    fn same_field(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch(self.field.to_string(), other.field.to_string()))
        }
    }

    pub fn arith(&self, op: ArithOp, other: &FieldElement) -> Result<FieldElement, FieldError> {
        match op {
            ArithOp::Add => self.checked_add(other),
            ArithOp::Sub => self.checked_sub(other),
            ArithOp::Mul => self.checked_mul(other),
            ArithOp::Div => self.checked_div(other),
        }
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        let value = match (&self.value, &other.value) {
            (Value::Rat(a), Value::Rat(b)) => Value::Rat(a + b),
            (Value::Fin(a), Value::Fin(b)) => Value::Fin(self.field.fin_add(*a, *b)),
            _ => unreachable!("values agree with their field"),
        };
        Ok(self.field.elem(value))
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        let value = match (&self.value, &other.value) {
            (Value::Rat(a), Value::Rat(b)) => Value::Rat(a * b),
            (Value::Fin(a), Value::Fin(b)) => Value::Fin(self.field.fin_mul(*a, *b)),
            _ => unreachable!("values agree with their field"),
        };
        Ok(self.field.elem(value))
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        self.checked_mul(&other.inv()?)
    }

    pub fn neg(&self) -> FieldElement {
        let value = match &self.value {
            Value::Rat(a) => Value::Rat(-a),
            Value::Fin(a) => Value::Fin(self.field.fin_neg(*a)),
        };
        self.field.elem(value)
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let value = match &self.value {
            Value::Rat(a) => Value::Rat(a.recip()),
            Value::Fin(a) => Value::Fin(self.field.fin_inv(*a)),
        };
        Ok(self.field.elem(value))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        match &self.value {
            Value::Rat(a) => {
                let mut acc = BigRational::one();
                let mut base = a.clone();
                let mut e = e;
                while e > 0 {
                    if e & 1 == 1 {
                        acc *= &base;
                    }
                    e >>= 1;
                    if e > 0 {
                        base = &base * &base;
                    }
                }
                self.field.elem(Value::Rat(acc))
            }
            Value::Fin(a) => self.field.elem(Value::Fin(self.field.fin_pow(*a, e))),
        }
    }

    /// Integer power with a possibly negative, arbitrary-size exponent.
    pub fn pow_bigint(&self, e: &BigInt) -> Result<FieldElement, FieldError> {
        let base = if e.sign() == Sign::Minus { self.inv()? } else { self.clone() };
        let mag: BigUint = e.magnitude().clone();
        if self.field.is_finite() && !self.is_zero() {
            let r = (&mag % BigUint::from(self.field.0.q - 1)).to_u64().expect("fits");
            return Ok(base.pow(r));
        }
        match mag.to_u64() {
            Some(m) => Ok(base.pow(m)),
            None if base.is_zero() || base.is_one() => Ok(base),
            None if base == self.field.one().neg() => Ok(if mag.bit(0) { base } else { self.field.one() }),
            None => panic!("exponent too large for an element of Q"),
        }
    }

    /// `self^(p^t)`: the t-th power of Frobenius. Identity on GF(p).
    pub fn frobenius(&self, t: u32) -> Result<FieldElement, FieldError> {
        match self.value {
            Value::Rat(_) => Err(FieldError::NotExtensionField),
            Value::Fin(a) => {
                let f = &self.field;
                let t = t as usize % f.0.k;
                if t == 0 {
                    return Ok(self.clone());
                }
                let e = f.0.p.pow(t as u32);
                Ok(f.elem(Value::Fin(f.fin_pow(a, e))))
            }
        }
    }

    /// Some `x` with `x^e = self`, or `None` when no such `x` exists in the field.
    pub fn nth_root(&self, e: u64) -> Result<Option<FieldElement>, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInput);
        }
        assert!(e >= 1, "root index must be positive");
        match &self.value {
            Value::Rat(r) => Ok(rational_root(r, e).map(|x| self.field.elem(Value::Rat(x)))),
            Value::Fin(_) => Ok(self.finite_root(e)),
        }
    }

    fn finite_root(&self, e: u64) -> Option<FieldElement> {
        let f = &self.field;
        let q = f.0.q;
        if q <= ENUMERATION_LIMIT {
            return f.elements().find(|x| x.pow(e) == *self);
        }
        let m = q - 1;
        let g = e.gcd(&m);
        // solvable iff a^((q-1)/g) = 1
        if !self.pow(m / g).is_one() {
            return None;
        }
        // u*e + v*m = g, so y^g = a implies (y^u)^e = a.
        let ext = (e as i128).extended_gcd(&(m as i128));
        let u = ext.x.rem_euclid(m as i128) as u64;
        let mut y = self.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ self.index().unwrap_or(0));
        let mut remaining = g;
        for r in prime_factors(g) {
            while remaining.is_multiple_of(r) {
                y = prime_root(&y, r, &mut rng)?;
                remaining /= r;
            }
        }
        let x = y.pow(u);
        debug_assert!(x.pow(e) == *self);
        Some(x)
    }
}

/// An r-th root of `a` for a prime r dividing q-1, by the Adleman-Manders-Miller
/// method: correct a^(r^-1 mod t) by an element of the r-Sylow subgroup.
fn prime_root<R: Rng>(a: &FieldElement, r: u64, rng: &mut R) -> Option<FieldElement> {
    let f = a.field.clone();
    let m = f.0.q - 1;
    if !a.pow(m / r).is_one() {
        return None;
    }
    let mut s = 0u32;
    let mut t = m;
    while t.is_multiple_of(r) {
        t /= r;
        s += 1;
    }
    // non-r-th power
    let rho = loop {
        let z = f.random_nonzero(rng);
        if !z.pow(m / r).is_one() {
            break z;
        }
    };
    let c = rho.pow(t); // generator of the r-Sylow subgroup, order r^s
    let alpha = if t == 1 { 0 } else { inv_mod(r % t, t) };
    let x0 = a.pow(alpha);
    // x0^r = a * eps with eps in the Sylow subgroup; find j with c^j = eps^{-1}
    let eps_inv = a.checked_div(&x0.pow(r)).ok()?;
    let j = sylow_log(&eps_inv, &c, r, s)?;
    if j % r != 0 {
        return None;
    }
    let w = c.pow(j / r);
    let x = x0 * w;
    (x.pow(r) == *a).then_some(x)
}

/// Discrete log of `h` to base `c` where c has order r^s, by Pohlig-Hellman.
fn sylow_log(h: &FieldElement, c: &FieldElement, r: u64, s: u32) -> Option<u64> {
    let order = r.pow(s);
    let gamma = c.pow(order / r); // order r
    let mut x = 0u64;
    let mut rpow = 1u64;
    for step in 0..s {
        let hk = (h.clone() * c.pow(order - x % order)).pow(r.pow(s - 1 - step));
        let d = (0..r).find(|&d| gamma.pow(d) == hk)?;
        x += d * rpow;
        rpow *= r;
    }
    Some(x % order)
}

fn rational_root(r: &BigRational, e: u64) -> Option<BigRational> {
    let e32 = u32::try_from(e).ok()?;
    let neg = r.is_negative();
    if neg && e.is_multiple_of(2) {
        return None;
    }
    let n = r.numer().abs();
    let d = r.denom().clone();
    let rn = n.nth_root(e32);
    let rd = d.nth_root(e32);
    if num_traits::pow(rn.clone(), e as usize) != n || num_traits::pow(rd.clone(), e as usize) != d {
        return None;
    }
    let root = BigRational::new(if neg { -rn } else { rn }, rd);
    Some(root)
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{}", e),
                }
            }
        }
        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
        impl $trait<FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$method(&rhs)
            }
        }
    };
}

// Operators panic on a field mismatch or division by zero; use the
// `checked_*` methods where either is a recoverable condition.
forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(&self)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}
