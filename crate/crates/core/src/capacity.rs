//! Closed-form secrecy capacities and capacity regions, exact rationals in
//! units of `log d` per channel use.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::gf::is_prime;
use crate::netmodel::{mincuts, NetError, NetworkSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CapacityError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

pub type Rational = BigRational;

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn min_of<I: IntoIterator<Item = Rational>>(it: I) -> Rational {
    it.into_iter().reduce(|a, b| if b < a { b } else { a }).expect("non-empty minimum")
}

pub fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

// ---------------------------------------------------------------------------
// Relay chains

/// A chain of `c` hops: hop `j` has `k[j-1]` parallel edges of which the
/// eavesdropper reads `r[j-1]`; `gamma[j-1]` bounds the fresh random
/// symbols per use available to the sender of hop `j` (ignored for the
/// source, which is unrestricted).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelayParams {
    pub c: usize,
    pub k: Vec<u64>,
    pub r: Vec<u64>,
    pub d: u64,
    pub gamma: Vec<u64>,
}

impl RelayParams {
    pub fn new(k: &[u64], r: &[u64], d: u64, gamma: &[u64]) -> Result<RelayParams, CapacityError> {
        let c = k.len();
        let gamma = if gamma.is_empty() { vec![0; c] } else { gamma.to_vec() };
        let p = RelayParams { c, k: k.to_vec(), r: r.to_vec(), d, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CapacityError> {
        if self.c == 0 || self.k.len() != self.c || self.r.len() != self.c || self.gamma.len() != self.c {
            return Err(CapacityError::BadParams("k, r and gamma need one entry per hop".into()));
        }
        if self.d < 2 {
            return Err(CapacityError::BadParams("alphabet size d must be at least 2".into()));
        }
        if let Some(j) = (0..self.c).find(|&j| self.k[j] == 0 || self.r[j] > self.k[j]) {
            return Err(CapacityError::BadParams(format!("hop {}: need 0 <= r <= k, k >= 1", j + 1)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelayCapacities {
    /// Unlimited randomness at every node.
    #[serde(serialize_with = "ser_rational")]
    pub c1: Rational,
    /// Randomness at the source only.
    #[serde(serialize_with = "ser_rational")]
    pub c2: Rational,
    /// Intermediate nodes limited by `gamma`.
    #[serde(serialize_with = "ser_rational")]
    pub c_gamma: Rational,
    /// The bounds `h^j` of the limited-randomness recursion.
    #[serde(serialize_with = "ser_rational_vec")]
    pub h: Vec<Rational>,
}

fn ser_rational_vec<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

/// Effective input budget `h^j` of hop `j`: `h^1 = k_1`,
/// `h^j = min(k_j, h^{j-1} (k_{j-1} - r_{j-1}) / k_{j-1} + gamma_j)`.
pub fn randomness_budget(p: &RelayParams) -> Vec<Rational> {
    let mut h = vec![rat(p.k[0] as i64)];
    for j in 1..p.c {
        let carried = &h[j - 1] * frac(p.k[j - 1] as i64 - p.r[j - 1] as i64, p.k[j - 1] as i64);
        let cand = carried + rat(p.gamma[j] as i64);
        let cap = rat(p.k[j] as i64);
        h.push(if cand < cap { cand } else { cap });
    }
    h
}

pub fn relay_capacity(p: &RelayParams) -> Result<RelayCapacities, CapacityError> {
    p.validate()?;
    let diff = |j: usize| (p.k[j] - p.r[j]) as i64;
    let c1 = min_of((0..p.c).map(|j| rat(diff(j))));
    let c2 = min_of((0..p.c).map(|j| {
        (j + 1..p.c).fold(rat(diff(j)), |acc, i| acc * frac(diff(i), p.k[i] as i64))
    }));
    let h = randomness_budget(p);
    let c_gamma = min_of((0..p.c).map(|j| frac(diff(j), p.k[j] as i64) * &h[j]));
    Ok(RelayCapacities { c1, c2, c_gamma, h })
}

// ---------------------------------------------------------------------------
// Regions

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    RelayScalar,
    MulticastNoRandomness,
    MulticastFullRandomness,
    MultimulticastNoRandomness,
    MultimulticastFullRandomness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Randomness {
    None,
    Full,
}

/// `sum of the rates selected by mask <= bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inequality {
    pub label: String,
    pub mask: Vec<bool>,
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational,
}

/// A downward-closed polytope of rate tuples (nonnegative coordinates).
/// Multi-source regions index rates row-major: `R_{i,j}` at `i * cols + j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RateRegion {
    pub kind: RegionKind,
    pub rows: usize,
    pub cols: usize,
    #[serde(serialize_with = "ser_constants")]
    pub constants: BTreeMap<String, Rational>,
    pub inequalities: Vec<Inequality>,
}

fn ser_constants<S: serde::Serializer>(m: &BTreeMap<String, Rational>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k, v.to_string())))
}

impl RateRegion {
    pub fn dimension(&self) -> usize {
        self.rows * self.cols
    }

    pub fn constant(&self, name: &str) -> Option<&Rational> {
        self.constants.get(name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("region serializes")
    }
}

/// Layered multicast parameters: `a` sources, intermediate group sizes
/// `groups` (`b_1..b_{c-1}`), `b` terminals, per-pair multiplicities `k`
/// and per-node tap counts `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MulticastParams {
    pub a: u64,
    pub b: u64,
    pub c: usize,
    pub groups: Vec<u64>,
    pub k: Vec<u64>,
    pub r: Vec<u64>,
    pub d: u64,
}

impl MulticastParams {
    /// `groups` may list `b_1..b_{c-1}` or `b_1..b_c` with `b_c = b`.
    pub fn new(a: u64, b: u64, groups: &[u64], k: &[u64], r: &[u64], d: u64) -> Result<Self, CapacityError> {
        let c = k.len();
        let groups = match groups.len() {
            n if c > 0 && n + 1 == c => groups.to_vec(),
            n if c > 0 && n == c && groups[c - 1] == b => groups[..c - 1].to_vec(),
            _ => return Err(CapacityError::BadParams("group sizes must list b_1..b_{c-1}".into())),
        };
        let p = MulticastParams { a, b, c, groups, k: k.to_vec(), r: r.to_vec(), d };
        p.validate()?;
        Ok(p)
    }

    /// `b_0 = a, b_1, ..., b_{c-1}, b_c = b`.
    pub fn layer_sizes(&self) -> Vec<u64> {
        let mut v = vec![self.a];
        v.extend_from_slice(&self.groups);
        v.push(self.b);
        v
    }

    fn validate(&self) -> Result<(), CapacityError> {
        if self.a == 0 || self.b == 0 || self.c == 0 || self.r.len() != self.c {
            return Err(CapacityError::BadParams("need a, b, c >= 1 and one tap count per layer".into()));
        }
        if self.d < 2 {
            return Err(CapacityError::BadParams("alphabet size d must be at least 2".into()));
        }
        let bs = self.layer_sizes();
        if bs.contains(&0) || self.k.contains(&0) {
            return Err(CapacityError::BadParams("group sizes and multiplicities must be positive".into()));
        }
        for j in 1..=self.c {
            let limit = if j == 1 { self.k[0] } else { bs[j - 1] * self.k[j - 1] };
            if self.r[j - 1] > limit {
                return Err(CapacityError::BadParams(format!("layer {j}: r exceeds the edges entering a node")));
            }
        }
        Ok(())
    }

    /// Tap-free fraction carried across layers `j+1..c`:
    /// `prod_{i>j} (b_{i-1} k_i - r_i) / (b_{i-1} k_i)`.
    fn tail_factor(&self, j: usize) -> Rational {
        let bs = self.layer_sizes();
        (j + 1..=self.c).fold(Rational::one(), |acc, i| {
            let full = (bs[i - 1] * self.k[i - 1]) as i64;
            acc * frac(full - self.r[i - 1] as i64, full)
        })
    }

    /// The cut term of layer `j >= 2`: `(b_{j-1} k_j - r_j) b_j * tail(j)`.
    fn layer_term(&self, j: usize) -> Rational {
        let bs = self.layer_sizes();
        rat(((bs[j - 1] * self.k[j - 1]) as i64 - self.r[j - 1] as i64) * bs[j] as i64) * self.tail_factor(j)
    }

    /// Single-source first-layer term `(k_1 - r_1) b_1`, optionally with the tail.
    fn first_term(&self, with_tail: bool) -> Rational {
        let bs = self.layer_sizes();
        let t = rat((self.k[0] as i64 - self.r[0] as i64) * bs[1] as i64);
        if with_tail {
            t * self.tail_factor(1)
        } else {
            t
        }
    }

    fn last_layer_bound(&self) -> Rational {
        let bs = self.layer_sizes();
        rat((bs[self.c - 1] * self.k[self.c - 1]) as i64 - self.r[self.c - 1] as i64)
    }

    fn check_full_hypothesis(&self) -> Result<(), CapacityError> {
        match self.c {
            1 => Ok(()),
            2 | 3 if self.r[self.c - 1].is_multiple_of(self.k[self.c - 1]) => Ok(()),
            2 | 3 => Err(CapacityError::HypothesisViolated(format!(
                "full randomness needs r_c / k_c integral, got {}/{}",
                self.r[self.c - 1],
                self.k[self.c - 1]
            ))),
            c => Err(CapacityError::HypothesisViolated(format!(
                "full-randomness regions are known for c <= 3, got c = {c}"
            ))),
        }
    }
}

fn simplex_mask(n: usize) -> Vec<bool> {
    vec![true; n]
}

fn unit_mask(n: usize, i: usize) -> Vec<bool> {
    (0..n).map(|x| x == i).collect()
}

/// Single-source multicast region: `sum R <= A1` (or `A3` under full
/// randomness with c = 3) and `R_i <= A2`.
pub fn multicast_region(p: &MulticastParams, randomness: Randomness) -> Result<RateRegion, CapacityError> {
    if p.a != 1 {
        return Err(CapacityError::BadParams("multicast regions have a single source; use multimulticast".into()));
    }
    let a1 = if p.c == 1 {
        p.first_term(true)
    } else {
        min_of(std::iter::once(p.first_term(true)).chain((2..=p.c).map(|j| p.layer_term(j))))
    };
    let a2 = p.last_layer_bound();
    let b = p.b as usize;
    let mut constants = BTreeMap::from([("A1".to_string(), a1.clone()), ("A2".to_string(), a2.clone())]);
    let (kind, sum_label, sum_bound) = match randomness {
        Randomness::None => (RegionKind::MulticastNoRandomness, "A1", a1),
        Randomness::Full => {
            p.check_full_hypothesis()?;
            if p.c == 3 {
                let a3 = min_of([p.first_term(false), p.layer_term(2), p.layer_term(3)]);
                constants.insert("A3".into(), a3.clone());
                (RegionKind::MulticastFullRandomness, "A3", a3)
            } else {
                (RegionKind::MulticastFullRandomness, "A1", a1)
            }
        }
    };
    let mut inequalities = vec![Inequality { label: format!("sum <= {sum_label}"), mask: simplex_mask(b), bound: sum_bound }];
    for i in 0..b {
        inequalities.push(Inequality { label: format!("R{} <= A2", i + 1), mask: unit_mask(b, i), bound: a2.clone() });
    }
    Ok(RateRegion { kind, rows: 1, cols: b, constants, inequalities })
}

/// Multi-source multicast region over `R_{i,j}` (source `i`, terminal `j`):
/// total `<= B1` (`B4`), per source `<= B2` (`B5`), per terminal `<= B3`.
pub fn multimulticast_region(p: &MulticastParams, randomness: Randomness) -> Result<RateRegion, CapacityError> {
    let a = p.a as i64;
    let later: Vec<Rational> = (2..=p.c).map(|j| p.layer_term(j)).collect();
    let b1 = min_of(std::iter::once(p.first_term(true) * rat(a)).chain(later.iter().cloned()));
    let b2 = min_of(std::iter::once(p.first_term(true)).chain(later.iter().cloned()));
    let b3 = p.last_layer_bound();
    let mut constants = BTreeMap::from([
        ("B1".to_string(), b1.clone()),
        ("B2".to_string(), b2.clone()),
        ("B3".to_string(), b3.clone()),
    ]);
    let (kind, total, per_source) = match randomness {
        Randomness::None => (RegionKind::MultimulticastNoRandomness, ("B1", b1), ("B2", b2)),
        Randomness::Full => {
            p.check_full_hypothesis()?;
            if p.c == 3 {
                let b4 = min_of(std::iter::once(p.first_term(false) * rat(a)).chain(later.iter().cloned()));
                let b5 = min_of(std::iter::once(p.first_term(false)).chain(later.iter().cloned()));
                constants.insert("B4".into(), b4.clone());
                constants.insert("B5".into(), b5.clone());
                (RegionKind::MultimulticastFullRandomness, ("B4", b4), ("B5", b5))
            } else {
                (RegionKind::MultimulticastFullRandomness, ("B1", b1), ("B2", b2))
            }
        }
    };
    let (rows, cols) = (p.a as usize, p.b as usize);
    let n = rows * cols;
    let mut inequalities = vec![Inequality { label: format!("sum <= {}", total.0), mask: simplex_mask(n), bound: total.1 }];
    for i in 0..rows {
        inequalities.push(Inequality {
            label: format!("source {} <= {}", i + 1, per_source.0),
            mask: (0..n).map(|x| x / cols == i).collect(),
            bound: per_source.1.clone(),
        });
    }
    for j in 0..cols {
        inequalities.push(Inequality {
            label: format!("terminal {} <= B3", j + 1),
            mask: (0..n).map(|x| x % cols == j).collect(),
            bound: b3.clone(),
        });
    }
    Ok(RateRegion { kind, rows, cols, constants, inequalities })
}

/// One-dimensional region `R <= C` for a relay capacity value.
pub fn relay_region(capacity: Rational) -> RateRegion {
    RateRegion {
        kind: RegionKind::RelayScalar,
        rows: 1,
        cols: 1,
        constants: BTreeMap::from([("C".to_string(), capacity.clone())]),
        inequalities: vec![Inequality { label: "R <= C".into(), mask: vec![true], bound: capacity }],
    }
}

/// Membership test; on failure names the first violated constraint.
pub fn region_contains(region: &RateRegion, rates: &[Rational]) -> Result<(bool, Option<String>), CapacityError> {
    if rates.len() != region.dimension() {
        return Err(CapacityError::DimensionMismatch(format!(
            "region has {} coordinates, got {}",
            region.dimension(),
            rates.len()
        )));
    }
    if let Some(i) = rates.iter().position(|r| r.is_negative()) {
        return Ok((false, Some(format!("R{} >= 0", i + 1))));
    }
    for ineq in &region.inequalities {
        let sum: Rational = rates.iter().zip(&ineq.mask).filter(|(_, &m)| m).map(|(r, _)| r.clone()).sum();
        if sum > ineq.bound {
            return Ok((false, Some(ineq.label.clone())));
        }
    }
    Ok((true, None))
}

const MAX_VERTEX_DIMENSION: usize = 4;

/// Vertices of a region of dimension at most 4: every feasible intersection
/// of `dimension` tight constraints (including the coordinate planes).
pub fn region_vertices(region: &RateRegion) -> Result<Vec<Vec<Rational>>, CapacityError> {
    let n = region.dimension();
    if n > MAX_VERTEX_DIMENSION {
        return Err(CapacityError::TooLarge(format!("vertex listing supports dimension <= {MAX_VERTEX_DIMENSION}")));
    }
    let mut planes: Vec<(Vec<Rational>, Rational)> = region
        .inequalities
        .iter()
        .map(|i| (i.mask.iter().map(|&m| if m { rat(1) } else { rat(0) }).collect(), i.bound.clone()))
        .collect();
    for i in 0..n {
        planes.push(((0..n).map(|x| if x == i { rat(-1) } else { rat(0) }).collect(), rat(0)));
    }
    let idx: Vec<usize> = (0..planes.len()).collect();
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for pick in crate::netmodel::subsets(&idx, n) {
        let rows: Vec<&(Vec<Rational>, Rational)> = pick.iter().map(|&i| &planes[i]).collect();
        if let Some(x) = solve_rational(&rows) {
            let feasible = region_contains(region, &x)?.0;
            if feasible && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Unique solution of a square system, if it is nonsingular.
fn solve_rational(rows: &[&(Vec<Rational>, Rational)]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Whether every point of `inner` lies in `outer`: vertex containment for
/// small dimensions, constraint-wise bound comparison otherwise.
pub fn is_subregion(inner: &RateRegion, outer: &RateRegion) -> Result<bool, CapacityError> {
    if inner.dimension() != outer.dimension() {
        return Err(CapacityError::DimensionMismatch("regions of different dimension".into()));
    }
    if inner.dimension() <= MAX_VERTEX_DIMENSION {
        for v in region_vertices(inner)? {
            if !region_contains(outer, &v)?.0 {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    Ok(outer.inequalities.iter().all(|o| {
        inner.inequalities.iter().any(|i| i.mask == o.mask && i.bound <= o.bound)
    }))
}

// ---------------------------------------------------------------------------
// Wiretap cut bounds and prime powers

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WiretapCapacity {
    pub mincut1: usize,
    pub mincut2: usize,
    /// Capacity without intermediate randomness: `mincut2 - r`.
    pub c2_exact: u64,
    pub c1_lower: u64,
    pub c1_upper: u64,
    /// No pseudo source, so the bracket closes.
    pub c1_exact: bool,
}

pub fn wiretap_mincut_capacity(spec: &NetworkSpec, r: usize) -> Result<WiretapCapacity, CapacityError> {
    let (m1, m2) = mincuts(spec)?;
    let c2 = m2.saturating_sub(r) as u64;
    let c1_upper = m1.saturating_sub(r) as u64;
    Ok(WiretapCapacity {
        mincut1: m1,
        mincut2: m2,
        c2_exact: c2,
        c1_lower: c2,
        c1_upper,
        c1_exact: spec.pseudo_sources().is_empty(),
    })
}

/// Largest `x` with `x^e <= n`.
fn integer_root(n: u64, e: u32) -> u64 {
    if e == 1 {
        return n;
    }
    let mut x = (n as f64).powf(1.0 / e as f64).round() as u64;
    while x > 0 && x.checked_pow(e).is_none_or(|v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_pow(e).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

pub fn is_prime_power(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    (1..=63).take_while(|&e| e == 1 || 1u64 << e <= n).any(|e| {
        let x = integer_root(n, e);
        x >= 2 && x.pow(e) == n && is_prime(x)
    })
}

const MAX_PRIME_POWER_INPUT: u64 = 1 << 62;

/// Largest prime power not exceeding `d^n`.
pub fn max_prime_power(d: u64, n: u32) -> Result<u64, CapacityError> {
    if d < 2 || n == 0 {
        return Err(CapacityError::BadParams("need d >= 2 and n >= 1".into()));
    }
    let top = d
        .checked_pow(n)
        .filter(|&t| t <= MAX_PRIME_POWER_INPUT)
        .ok_or_else(|| CapacityError::TooLarge(format!("{d}^{n} exceeds 2^62")))?;
    Ok((2..=top).rev().find(|&x| is_prime_power(x)).expect("2 is a prime power"))
}

/// `log2(max_prime_power(d, n)) / n` for `n = 1..=n_max`.
pub fn prime_power_rates(d: u64, n_max: u32) -> Result<Vec<f64>, CapacityError> {
    (1..=n_max).map(|n| Ok((max_prime_power(d, n)? as f64).log2() / n as f64)).collect()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relay_examples() {
        let p = RelayParams::new(&[2, 2], &[1, 1], 2, &[0, 0]).unwrap();
        let c = relay_capacity(&p).unwrap();
        assert_eq!((c.c1.clone(), c.c2.clone(), c.c_gamma.clone()), (rat(1), frac(1, 2), frac(1, 2)));
        let p = RelayParams::new(&[2, 2], &[1, 1], 2, &[0, 1]).unwrap();
        let c = relay_capacity(&p).unwrap();
        assert_eq!(c.h, vec![rat(2), rat(2)]);
        assert_eq!(c.c_gamma, rat(1));
        let p = RelayParams::new(&[3, 2], &[0, 0], 2, &[0, 0]).unwrap();
        let c = relay_capacity(&p).unwrap();
        assert_eq!((c.c1, c.c2, c.c_gamma), (rat(2), rat(2), rat(2)));
        assert!(RelayParams::new(&[2], &[3], 2, &[]).is_err());
    }

    #[test]
    fn multicast_examples() {
        let p = MulticastParams::new(1, 2, &[2], &[2, 1], &[1, 1], 2).unwrap();
        let none = multicast_region(&p, Randomness::None).unwrap();
        assert_eq!(none.constant("A1"), Some(&rat(1)));
        assert_eq!(none.constant("A2"), Some(&rat(1)));
        let full = multicast_region(&p, Randomness::Full).unwrap();
        assert_eq!(full.inequalities, none.inequalities);
        assert_eq!(region_contains(&none, &[frac(1, 2), frac(1, 2)]).unwrap(), (true, None));
        assert_eq!(region_contains(&none, &[rat(1), frac(1, 4)]).unwrap(), (false, Some("sum <= A1".into())));
        assert!(region_contains(&none, &[rat(0)]).is_err());

        let bad = MulticastParams::new(1, 2, &[2], &[2, 2], &[1, 1], 2).unwrap();
        assert!(matches!(multicast_region(&bad, Randomness::Full), Err(CapacityError::HypothesisViolated(_))));
    }

    #[test]
    fn multimulticast_example() {
        let p = MulticastParams::new(2, 2, &[2, 2, 2], &[2, 2, 2], &[1, 1, 2], 2).unwrap();
        let reg = multimulticast_region(&p, Randomness::Full).unwrap();
        assert_eq!(reg.constant("B4"), Some(&rat(3)));
        assert_eq!(reg.constant("B5"), Some(&rat(2)));
        assert_eq!(reg.constant("B3"), Some(&rat(2)));
    }

    #[test]
    fn vertices_of_simple_region() {
        let p = MulticastParams::new(1, 2, &[2], &[2, 1], &[1, 1], 2).unwrap();
        let reg = multicast_region(&p, Randomness::None).unwrap();
        let v = region_vertices(&reg).unwrap();
        assert_eq!(v, vec![vec![rat(0), rat(0)], vec![rat(0), rat(1)], vec![rat(1), rat(0)]]);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(max_prime_power(6, 1).unwrap(), 5);
        assert_eq!(max_prime_power(6, 2).unwrap(), 32);
        assert_eq!(max_prime_power(2, 10).unwrap(), 1024);
        assert!(is_prime_power(49) && is_prime_power(2) && !is_prime_power(36));
        assert!(matches!(max_prime_power(10, 20), Err(CapacityError::TooLarge(_))));
    }

    #[test]
    fn wiretap_bracket() {
        let (spec, _) = crate::netmodel::build_fixture("five_node").unwrap();
        let w = wiretap_mincut_capacity(&spec, 1).unwrap();
        assert_eq!((w.c2_exact, w.c1_lower, w.c1_upper, w.c1_exact), (0, 0, 1, false));
        let relay = crate::netmodel::build_relay(1, &[3], &[1], 2, &[0]).unwrap();
        let w = wiretap_mincut_capacity(&relay, 1).unwrap();
        assert_eq!((w.c2_exact, w.c1_upper, w.c1_exact), (2, 2, true));
    }
}
