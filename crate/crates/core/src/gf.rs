//! Arithmetic in GF(p^m) for q = p^m <= 2^16, plus dense matrices over it.
//!
//! Elements are plain `u32` values holding the base-p digits of the
//! polynomial coefficients, lowest degree first. The hot paths (`add`,
//! `mul`) go through precomputed tables; the polynomial routines they are
//! built from stay available as the reference implementation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field size.
pub const MAX_FIELD_SIZE: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field size {p}^{m} exceeds 2^16")]
    TooLarge { p: u64, m: u32 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    SpecMismatch,
    #[error("value {0} is not an element of the field")]
    NotAnElement(u64),
    #[error("linear system has no solution")]
    NoSolution,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("reduction polynomial is not a monic irreducible of degree m")]
    BadPolynomial,
}

/// Deterministic Miller-Rabin for all `u64` (the first twelve prime bases suffice).
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Serialized description of a field: characteristic, degree and the
/// reduction polynomial as coefficients from degree 0 up to the leading 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub reduction_poly: Vec<u32>,
}

impl FieldSpec {
    pub fn q(&self) -> u32 {
        self.p.pow(self.m)
    }
}

/// Polynomials over GF(p), coefficients lowest degree first, no trailing zeros.
mod poly {
    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn inv_mod_p(a: u32, p: u32) -> u32 {
        // p is prime and small, Fermat is enough here.
        let mut result = 1u64;
        let mut base = a as u64 % p as u64;
        let mut e = p as u64 - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        result as u32
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out = vec![0u32; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *slot = (x + p - y) % p;
        }
        trim(out)
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(out.into_iter().map(|v| v as u32).collect())
    }

    /// Quotient and remainder of `a / b` with `b` nonzero.
    pub fn divmod(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
        let b = trim(b.to_vec());
        assert!(!b.is_empty(), "polynomial division by zero");
        let mut rem = trim(a.to_vec());
        if rem.len() < b.len() {
            return (Vec::new(), rem);
        }
        let lead_inv = inv_mod_p(*b.last().unwrap(), p) as u64;
        let mut quot = vec![0u32; rem.len() - b.len() + 1];
        while rem.len() >= b.len() && !rem.is_empty() {
            let shift = rem.len() - b.len();
            let coef = (*rem.last().unwrap() as u64 * lead_inv % p as u64) as u32;
            quot[shift] = coef;
            for (i, &bc) in b.iter().enumerate() {
                let v = rem[i + shift] as u64 + (p - coef) as u64 * bc as u64;
                rem[i + shift] = (v % p as u64) as u32;
            }
            rem = trim(rem);
        }
        (trim(quot), rem)
    }

    pub fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        divmod(a, b, p).1
    }

    /// All monic polynomials of the given degree, in base-p integer order of
    /// their lower coefficients.
    pub fn monic_of_degree(deg: u32, p: u32) -> impl Iterator<Item = Vec<u32>> {
        let count = (p as u64).pow(deg);
        (0..count).map(move |mut v| {
            let mut coeffs = Vec::with_capacity(deg as usize + 1);
            for _ in 0..deg {
                coeffs.push((v % p as u64) as u32);
                v /= p as u64;
            }
            coeffs.push(1);
            coeffs
        })
    }

    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let deg = f.len() as u32 - 1;
        if deg == 0 {
            return false;
        }
        if deg == 1 {
            return true;
        }
        for d in 1..=deg / 2 {
            for g in monic_of_degree(d, p) {
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

struct FieldInner {
    spec: FieldSpec,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
}

/// A finite field handle. Cloning is cheap; equality compares the
/// underlying `FieldSpec`.
#[derive(Clone)]
pub struct Field {
    inner: Arc<FieldInner>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p(), self.m())
    }
}

/// Builds GF(p^m) with the smallest monic irreducible reduction polynomial
/// (coefficients read as a base-p integer, leading term excluded).
pub fn field_make(p: u32, m: u32) -> Result<Field, GfError> {
    if !is_prime(p as u64) {
        return Err(GfError::NotPrime(p as u64));
    }
    if m == 0 {
        return Err(GfError::ZeroDegree);
    }
    let q = (p as u64).checked_pow(m);
    if q.is_none_or(|q| q > MAX_FIELD_SIZE) {
        return Err(GfError::TooLarge { p: p as u64, m });
    }
    let poly = poly::monic_of_degree(m, p)
        .find(|f| poly::is_irreducible(f, p))
        .expect("an irreducible polynomial exists in every degree");
    Field::from_spec(FieldSpec { p, m, reduction_poly: poly })
}

impl Field {
    pub fn from_spec(spec: FieldSpec) -> Result<Field, GfError> {
        let (p, m) = (spec.p, spec.m);
        if !is_prime(p as u64) {
            return Err(GfError::NotPrime(p as u64));
        }
        if m == 0 {
            return Err(GfError::ZeroDegree);
        }
        let q = (p as u64)
            .checked_pow(m)
            .filter(|&q| q <= MAX_FIELD_SIZE)
            .ok_or(GfError::TooLarge { p: p as u64, m })? as u32;
        let f = &spec.reduction_poly;
        if f.len() != m as usize + 1
            || f.last() != Some(&1)
            || f.iter().any(|&c| c >= p)
            || !poly::is_irreducible(f, p)
        {
            return Err(GfError::BadPolynomial);
        }
        let mut field = FieldInner { spec, q, exp: Vec::new(), log: Vec::new(), add: None };
        build_tables(&mut field);
        Ok(Field { inner: Arc::new(field) })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.inner.spec
    }
    pub fn p(&self) -> u32 {
        self.inner.spec.p
    }
    pub fn m(&self) -> u32 {
        self.inner.spec.m
    }
    pub fn q(&self) -> u32 {
        self.inner.q
    }

    pub fn contains(&self, a: u32) -> bool {
        a < self.inner.q
    }

    pub fn elem(&self, value: u32) -> Result<FieldElem, GfError> {
        if !self.contains(value) {
            return Err(GfError::NotAnElement(value as u64));
        }
        Ok(FieldElem { field: self.clone(), value })
    }

    /// Coefficients of `a`, lowest degree first, always `m` of them.
    pub fn coeffs(&self, a: u32) -> Vec<u32> {
        let p = self.p();
        let mut v = a;
        (0..self.m())
            .map(|_| {
                let c = v % p;
                v /= p;
                c
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> u32 {
        let p = self.p();
        coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + c % p)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.inner;
        if inner.spec.p == 2 {
            return a ^ b;
        }
        if inner.spec.m == 1 {
            let s = a + b;
            return if s >= inner.q { s - inner.q } else { s };
        }
        if let Some(table) = &inner.add {
            return table[(a * inner.q + b) as usize];
        }
        digitwise(a, b, inner.spec.p, |x, y, p| (x + y) % p)
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let inner = &*self.inner;
        if inner.spec.p == 2 {
            return a;
        }
        if inner.spec.m == 1 {
            return if a == 0 { 0 } else { inner.q - a };
        }
        digitwise(a, 0, inner.spec.p, |x, _, p| (p - x) % p)
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let inner = &*self.inner;
        let idx = inner.log[a as usize] + inner.log[b as usize];
        let order = inner.q - 1;
        inner.exp[if idx >= order { idx - order } else { idx } as usize]
    }

    /// Product computed directly as polynomials reduced modulo the
    /// reduction polynomial.
    pub fn mul_poly(&self, a: u32, b: u32) -> u32 {
        let p = self.p();
        let prod = poly::mul(&poly::trim(self.coeffs(a)), &poly::trim(self.coeffs(b)), p);
        let r = poly::rem(&prod, &self.inner.spec.reduction_poly, p);
        self.from_coeffs(&r)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm on
    /// polynomials.
    pub fn inv(&self, a: u32) -> Result<u32, GfError> {
        if a == 0 {
            return Err(GfError::DivisionByZero);
        }
        let p = self.p();
        let f = self.inner.spec.reduction_poly.clone();
        // Invariant: s_i * a = r_i (mod f).
        let (mut r0, mut r1) = (f, poly::trim(self.coeffs(a)));
        let (mut s0, mut s1) = (Vec::<u32>::new(), vec![1u32]);
        while !r1.is_empty() {
            let (quot, rem) = poly::divmod(&r0, &r1, p);
            let s2 = poly::sub(&s0, &poly::mul(&quot, &s1, p), p);
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is a nonzero constant since f is irreducible.
        debug_assert_eq!(r0.len(), 1);
        let scale = poly::inv_mod_p(r0[0], p);
        let s: Vec<u32> = s0.iter().map(|&c| (c as u64 * scale as u64 % p as u64) as u32).collect();
        let mut coeffs = poly::rem(&s, &self.inner.spec.reduction_poly, p);
        coeffs.resize(self.m() as usize, 0);
        Ok(self.from_coeffs(&coeffs))
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` by square-and-multiply; `0^0 = 1`.
    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut result = 1u32;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        result
    }

    /// Dot product of two equal-length slices.
    #[inline]
    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// A generator of the multiplicative group, the smallest one in integer order.
    pub fn primitive_element(&self) -> u32 {
        self.inner.exp[1.min(self.inner.exp.len() - 1)]
    }

    /// The subfield-free embedding of base-field scalars, i.e. the
    /// elements `0..p` as constant polynomials.
    pub fn from_int(&self, v: u64) -> u32 {
        (v % self.p() as u64) as u32
    }
}

fn digitwise(a: u32, b: u32, p: u32, op: impl Fn(u32, u32, u32) -> u32) -> u32 {
    let (mut a, mut b) = (a, b);
    let mut out = 0u32;
    let mut place = 1u32;
    while a > 0 || b > 0 {
        out += op(a % p, b % p, p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

fn build_tables(field: &mut FieldInner) {
    let q = field.q;
    let probe = Field {
        inner: Arc::new(FieldInner {
            spec: field.spec.clone(),
            q,
            exp: Vec::new(),
            log: Vec::new(),
            add: None,
        }),
    };
    if q == 2 {
        field.exp = vec![1];
        field.log = vec![0, 0];
    } else {
        let order = q - 1;
        let mut found = None;
        'search: for g in 2..q {
            let mut exp = Vec::with_capacity(order as usize);
            let mut x = 1u32;
            for _ in 0..order {
                exp.push(x);
                x = probe.mul_poly(x, g);
                if x == 1 && exp.len() < order as usize {
                    continue 'search;
                }
            }
            found = Some(exp);
            break;
        }
        let exp = found.expect("multiplicative group is cyclic");
        let mut log = vec![0u32; q as usize];
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }
        field.exp = exp;
        field.log = log;
    }
    if field.spec.p != 2 && field.spec.m > 1 && q <= 256 {
        let mut table = vec![0u32; (q * q) as usize];
        for a in 0..q {
            for b in 0..q {
                table[(a * q + b) as usize] = digitwise(a, b, field.spec.p, |x, y, p| (x + y) % p);
            }
        }
        field.add = Some(table);
    }
}

/// A field element tagged with its field; operations check that both
/// operands agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElem {
    pub field: Field,
    pub value: u32,
}

impl FieldElem {
    fn same(&self, other: &FieldElem) -> Result<(), GfError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(GfError::SpecMismatch)
        }
    }
    fn wrap(&self, value: u32) -> FieldElem {
        FieldElem { field: self.field.clone(), value }
    }
    pub fn add(&self, other: &FieldElem) -> Result<FieldElem, GfError> {
        self.same(other)?;
        Ok(self.wrap(self.field.add(self.value, other.value)))
    }
    pub fn sub(&self, other: &FieldElem) -> Result<FieldElem, GfError> {
        self.same(other)?;
        Ok(self.wrap(self.field.sub(self.value, other.value)))
    }
    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem, GfError> {
        self.same(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }
    pub fn inv(&self) -> Result<FieldElem, GfError> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }
    pub fn pow(&self, e: u64) -> FieldElem {
        self.wrap(self.field.pow(self.value, e))
    }
    pub fn coeffs(&self) -> Vec<u32> {
        self.field.coeffs(self.value)
    }
}

impl Serialize for FieldElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.value)
    }
}

/// Dense row-major matrix over a field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMatrix {
    pub field: Field,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u32>,
}

impl FieldMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FieldMatrix { field: field.clone(), rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: &Field, rows: &[Vec<u32>]) -> Result<Self, GfError> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(GfError::DimensionMismatch("ragged rows".into()));
        }
        if let Some(&bad) = rows.iter().flatten().find(|&&v| !field.contains(v)) {
            return Err(GfError::NotAnElement(bad as u64));
        }
        Ok(FieldMatrix {
            field: field.clone(),
            rows: rows.len(),
            cols,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.entries[r * self.cols + c] = v;
    }
    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[u32]) -> Result<Vec<u32>, GfError> {
        if x.len() != self.cols {
            return Err(GfError::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), x)).collect())
    }

    /// `self * x` into a caller-provided buffer; lengths are trusted.
    #[inline]
    pub fn mul_vec_into(&self, x: &[u32], out: &mut [u32]) {
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = self.field.dot(self.row(r), x);
        }
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix, GfError> {
        if self.field != other.field {
            return Err(GfError::SpecMismatch);
        }
        if self.cols != other.rows {
            return Err(GfError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = FieldMatrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Columns `cols` of `self`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if pr != row {
                for c in 0..self.cols {
                    self.entries.swap(pr * self.cols + c, row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(row, col)).expect("pivot is nonzero");
            for c in 0..self.cols {
                let v = f.mul(self.get(row, c), inv);
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..self.cols {
                    let v = f.sub(self.get(r, c), f.mul(factor, self.get(row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().row_reduce().len()
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<FieldMatrix, GfError> {
        if self.rows != self.cols {
            return Err(GfError::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = FieldMatrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, 1);
        }
        let pivots = aug.row_reduce();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(GfError::NoSolution);
        }
        let mut out = FieldMatrix::zeros(&self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, aug.get(r, n + c));
            }
        }
        Ok(out)
    }

    /// Solves `self * x = b`. Free variables are set to zero, so the
    /// returned solution is a linear function of `b` on the column space.
    pub fn solve(&self, b: &[u32]) -> Result<Vec<u32>, GfError> {
        matrix_solve(self, b)
    }
}

/// Gaussian elimination for `a * x = b`. Returns `NoSolution` when the
/// system is inconsistent.
pub fn matrix_solve(a: &FieldMatrix, b: &[u32]) -> Result<Vec<u32>, GfError> {
    if b.len() != a.rows {
        return Err(GfError::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has {}",
            a.rows,
            b.len()
        )));
    }
    let n = a.cols;
    let mut aug = FieldMatrix::zeros(&a.field, a.rows, n + 1);
    for r in 0..a.rows {
        for c in 0..n {
            aug.set(r, c, a.get(r, c));
        }
        aug.set(r, n, b[r]);
    }
    let pivots = aug.row_reduce();
    if pivots.last() == Some(&n) {
        return Err(GfError::NoSolution);
    }
    let mut x = vec![0u32; n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug.get(r, n);
    }
    Ok(x)
}
