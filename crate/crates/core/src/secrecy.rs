//! Exact leakage measurement.
//!
//! Messages and scrambles are uniform, so every quantity here is a function
//! of integer counts over equally likely worlds. Entropies scaled by the
//! world count are integer combinations of logarithms of integers, which is
//! what [`LogSum`] represents; equality tests on them are exact.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::attack::{self, AttackClass, AttackError, AttackStrategy, SweepSummary};
use crate::gf::FieldMatrix;
use crate::netmodel::{NetError, NetworkCode, NetworkSpec, Program, Scratch};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SecrecyError {
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("invalid cover: {0}")]
    BadCover(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

impl From<AttackError> for SecrecyError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::TooLarge(msg) => SecrecyError::TooLarge(msg),
            AttackError::Secrecy(inner) => inner,
            AttackError::Net(inner) => SecrecyError::Net(inner),
            other => SecrecyError::InvalidStrategy(other.to_string()),
        }
    }
}

/// Default cap on message x scramble assignments.
pub const DEFAULT_MAX_WORLDS: u64 = 1 << 24;

/// Enumeration cap, overridable through `SECNET_MAX_WORLDS`.
pub fn max_worlds() -> u64 {
    std::env::var("SECNET_MAX_WORLDS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_WORLDS)
}

// ---------------------------------------------------------------------------
// Exact sums of logarithms

/// `sum_p c_p * log2(p)` over primes `p` with integer coefficients.
///
/// Logarithms of distinct primes are linearly independent over the
/// rationals, so two sums are equal exactly when their coefficients agree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogSum {
    terms: BTreeMap<u64, BigInt>,
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            let mut e = 0;
            while n.is_multiple_of(f) {
                n /= f;
                e += 1;
            }
            out.push((f, e));
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Budget (in bits) for settling near-ties by comparing prime powers.
const EXACT_SIGN_BITS: f64 = 1e7;

impl LogSum {
    pub fn zero() -> LogSum {
        LogSum::default()
    }

    /// `coeff * log2(n)` for `n >= 1`.
    pub fn log_of(n: u64, coeff: i64) -> LogSum {
        let mut s = LogSum::zero();
        s.add_log(n, &BigInt::from(coeff));
        s
    }

    pub fn add_log(&mut self, n: u64, coeff: &BigInt) {
        assert!(n >= 1, "log of zero");
        if coeff.is_zero() {
            return;
        }
        for (p, e) in factorize(n) {
            let entry = self.terms.entry(p).or_insert_with(BigInt::zero);
            *entry += coeff * BigInt::from(e);
            if entry.is_zero() {
                self.terms.remove(&p);
            }
        }
    }

    /// Adds `n * log2(n)`, the building block of scaled entropies.
    pub fn add_n_log_n(&mut self, n: u64, sign: i64) {
        if n > 1 {
            self.add_log(n, &(BigInt::from(n) * sign));
        }
    }

    pub fn add(&mut self, other: &LogSum) {
        for (&p, c) in &other.terms {
            let entry = self.terms.entry(p).or_insert_with(BigInt::zero);
            *entry += c;
            if entry.is_zero() {
                self.terms.remove(&p);
            }
        }
    }

    pub fn sub(&mut self, other: &LogSum) {
        self.add(&other.scaled(&BigInt::from(-1)));
    }

    pub fn scaled(&self, k: &BigInt) -> LogSum {
        if k.is_zero() {
            return LogSum::zero();
        }
        LogSum { terms: self.terms.iter().map(|(&p, c)| (p, c * k)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().map(|(&p, c)| c.to_f64().unwrap_or(f64::NAN) * (p as f64).log2()).sum()
    }

    /// Exact sign. Floating point settles it unless the value is within the
    /// rounding bound of zero; then the two prime-power products are
    /// compared as big integers.
    pub fn signum(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let value = self.to_f64();
        let magnitude: f64 =
            self.terms.iter().map(|(&p, c)| c.abs().to_f64().unwrap_or(f64::INFINITY) * (p as f64).log2()).sum();
        let bound = magnitude * 1e-13 + 1e-300;
        if value.abs() > bound {
            return value.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        }
        if magnitude > EXACT_SIGN_BITS {
            // Beyond the exact budget; a nonzero sum this close to zero does
            // not arise at the enumeration sizes this crate accepts.
            return value.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        }
        let (mut pos, mut neg) = (BigUint::from(1u32), BigUint::from(1u32));
        for (&p, c) in &self.terms {
            let e = c.magnitude().to_u32().expect("exponent within budget");
            let factor = BigUint::from(p).pow(e);
            match c.sign() {
                Sign::Plus => pos *= factor,
                Sign::Minus => neg *= factor,
                Sign::NoSign => {}
            }
        }
        pos.cmp(&neg)
    }

    pub fn cmp_exact(&self, other: &LogSum) -> Ordering {
        let mut d = self.clone();
        d.sub(other);
        d.signum()
    }
}

/// `total * H` for the distribution given by `counts` (sum = `total`).
pub fn scaled_entropy<I: IntoIterator<Item = u64>>(counts: I) -> LogSum {
    let mut s = LogSum::zero();
    let mut total = 0u64;
    for c in counts {
        s.add_n_log_n(c, -1);
        total += c;
    }
    s.add_n_log_n(total, 1);
    s
}

pub(crate) fn n_log_n(n: u64) -> f64 {
    if n <= 1 {
        0.0
    } else {
        let x = n as f64;
        x * x.log2()
    }
}

// ---------------------------------------------------------------------------
// Worlds

/// Edge values of a code in every world.
///
/// World `w` spells its inputs in base `q` digits, least significant first:
/// the message symbols (message order), then the scramble symbols (node
/// order). The message index of a world is therefore `w mod |M|`. Edge
/// values pack the `n` symbols of an edge the same way.
#[derive(Clone, Debug)]
pub struct WorldTable {
    pub q: u32,
    pub n: usize,
    pub worlds: usize,
    pub message_count: usize,
    pub edge_count: usize,
    pub message: Vec<u32>,
    values: Vec<u32>,
    pub decode_failures: usize,
}

const CHUNK: usize = 1 << 12;

/// Number of worlds of a code, if it fits in `u64`.
pub fn world_count(code: &NetworkCode) -> Option<u64> {
    let digits = code.message_symbols() + code.scramble_symbols();
    (code.field.q() as u64).checked_pow(u32::try_from(digits).ok()?)
}

/// Checks the enumeration limits shared by every exhaustive analysis.
pub fn check_sizes(code: &NetworkCode) -> Result<(u64, u64), SecrecyError> {
    let cap = max_worlds();
    let worlds = world_count(code)
        .filter(|&w| w <= cap)
        .ok_or_else(|| SecrecyError::TooLarge(format!("more than {cap} message x scramble assignments")))?;
    let edge_space = (code.field.q() as u64)
        .checked_pow(code.n as u32)
        .filter(|&v| v <= u32::MAX as u64)
        .ok_or_else(|| SecrecyError::TooLarge("edge values do not fit in 32 bits".into()))?;
    Ok((worlds, edge_space))
}

impl WorldTable {
    pub fn enumerate(spec: &NetworkSpec, code: &NetworkCode) -> Result<WorldTable, SecrecyError> {
        let program = Program::new(spec, code)?;
        let (worlds, _) = check_sizes(code)?;
        let worlds = worlds as usize;
        let q = code.field.q();
        let n = code.n;
        let edge_count = spec.edge_count();
        let message_count = (q as usize).pow(program.message_len as u32);
        let chunks: Vec<(Vec<u32>, Vec<u32>, usize)> = (0..worlds.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let start = chunk * CHUNK;
                let end = (start + CHUNK).min(worlds);
                let mut buf = vec![0u32; program.buffer_len()];
                let mut scratch = Scratch::default();
                let mut msgs = Vec::with_capacity(end - start);
                let mut vals = Vec::with_capacity((end - start) * edge_count);
                let mut failures = 0;
                for w in start..end {
                    let mut rest = w;
                    for slot in buf.iter_mut().take(program.input_len) {
                        *slot = (rest % q as usize) as u32;
                        rest /= q as usize;
                    }
                    program.run(&mut buf, &mut scratch, |_, _| {});
                    if !program.decodes_correctly(&buf, &mut scratch) {
                        failures += 1;
                    }
                    msgs.push((w % message_count) as u32);
                    for e in 0..edge_count {
                        let at = program.edge_offset + e * n;
                        vals.push(pack(&buf[at..at + n], q));
                    }
                }
                (msgs, vals, failures)
            })
            .collect();
        let mut table = WorldTable {
            q,
            n,
            worlds,
            message_count,
            edge_count,
            message: Vec::with_capacity(worlds),
            values: Vec::with_capacity(worlds * edge_count),
            decode_failures: 0,
        };
        for (m, v, f) in chunks {
            table.message.extend(m);
            table.values.extend(v);
            table.decode_failures += f;
        }
        Ok(table)
    }

    /// Packed value of edge `edge` (1-based) in world `w`.
    #[inline]
    pub fn value(&self, w: usize, edge: usize) -> u32 {
        self.values[w * self.edge_count + edge - 1]
    }

    pub fn decodable(&self) -> bool {
        self.decode_failures == 0
    }

    pub fn message_entropy_bits(&self) -> f64 {
        (self.message_count as f64).log2()
    }

    /// Joint distribution of the message and the values of `edges`.
    pub fn view(&self, edges: &[usize]) -> JointDist {
        let mut counts = JointCounts::default();
        let mut z = Vec::with_capacity(edges.len());
        for w in 0..self.worlds {
            z.clear();
            z.extend(edges.iter().map(|&e| self.value(w, e)));
            counts.add(self.message[w], &z);
        }
        counts.into_dist(self.message_count as u64)
    }
}

pub fn pack(symbols: &[u32], q: u32) -> u32 {
    symbols.iter().rev().fold(0u32, |acc, &s| acc * q + s)
}

pub fn unpack(mut value: u32, q: u32, n: usize) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let s = value % q;
            value /= q;
            s
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Joint distributions

/// Accumulates `(message, observation)` counts without allocating for
/// observations already seen.
#[derive(Default, Debug)]
pub struct JointCounts {
    cells: HashMap<Vec<u32>, BTreeMap<u32, u64>>,
    total: u64,
}

impl JointCounts {
    #[inline]
    pub fn add(&mut self, m: u32, z: &[u32]) {
        match self.cells.get_mut(z) {
            Some(row) => *row.entry(m).or_insert(0) += 1,
            None => {
                self.cells.insert(z.to_vec(), BTreeMap::from([(m, 1)]));
            }
        }
        self.total += 1;
    }

    pub fn into_dist(self, message_count: u64) -> JointDist {
        JointDist { message_count, total: self.total, cells: self.cells.into_iter().collect() }
    }
}

/// Joint distribution of a message index and an observation sequence,
/// stored as counts over `total` equally likely worlds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDist {
    /// Size of the message alphabet.
    pub message_count: u64,
    pub total: u64,
    /// observation -> message -> count
    pub cells: BTreeMap<Vec<u32>, BTreeMap<u32, u64>>,
}

impl JointDist {
    pub fn from_pairs<I>(message_count: u64, pairs: I) -> JointDist
    where
        I: IntoIterator<Item = (u32, Vec<u32>)>,
    {
        let mut counts = JointCounts::default();
        for (m, z) in pairs {
            counts.add(m, &z);
        }
        counts.into_dist(message_count)
    }

    pub fn prob(&self, m: u32, z: &[u32]) -> BigRational {
        let c = self.cells.get(z).and_then(|row| row.get(&m)).copied().unwrap_or(0);
        BigRational::new(BigInt::from(c), BigInt::from(self.total))
    }

    /// Support as `(message, observation, probability)`.
    pub fn support(&self) -> Vec<(u32, Vec<u32>, BigRational)> {
        self.cells
            .iter()
            .flat_map(|(z, row)| {
                row.iter().map(move |(&m, &c)| {
                    (m, z.clone(), BigRational::new(BigInt::from(c), BigInt::from(self.total)))
                })
            })
            .collect()
    }

    fn message_marginal(&self) -> BTreeMap<u32, u64> {
        let mut out = BTreeMap::new();
        for row in self.cells.values() {
            for (&m, &c) in row {
                *out.entry(m).or_insert(0) += c;
            }
        }
        out
    }

    /// `P(m, z) = P(m) P(z)` for every pair, compared on integers.
    pub fn is_independent(&self) -> bool {
        let pm = self.message_marginal();
        let t = self.total as u128;
        self.cells.iter().all(|(_, row)| {
            let cz: u64 = row.values().sum();
            pm.iter().all(|(m, &cm)| {
                let cmz = row.get(m).copied().unwrap_or(0);
                cmz as u128 * t == cm as u128 * cz as u128
            })
        })
    }

    /// `total * H(M | Z)`.
    pub fn scaled_conditional_entropy(&self) -> LogSum {
        let mut s = LogSum::zero();
        for row in self.cells.values() {
            s.add(&scaled_entropy(row.values().copied()));
        }
        s
    }

    /// `total * I(M; Z)`.
    pub fn scaled_leakage(&self) -> LogSum {
        let mut s = scaled_entropy(self.message_marginal().into_values());
        s.sub(&self.scaled_conditional_entropy());
        s
    }

    pub fn message_entropy_bits(&self) -> f64 {
        let pm = self.message_marginal();
        (n_log_n(self.total) - pm.values().map(|&c| n_log_n(c)).sum::<f64>()) / self.total as f64
    }

    pub fn conditional_entropy_bits(&self) -> f64 {
        let sum: f64 = self
            .cells
            .values()
            .map(|row| n_log_n(row.values().sum()) - row.values().map(|&c| n_log_n(c)).sum::<f64>())
            .sum();
        sum / self.total as f64
    }

    /// `I(M; Z)` in bits; exactly `0.0` when the independence test passes.
    pub fn mutual_information(&self) -> f64 {
        if self.is_independent() {
            return 0.0;
        }
        (self.message_entropy_bits() - self.conditional_entropy_bits()).max(0.0)
    }

    /// `sum_z sum_m | P(z)/|M| - P(m, z) |`, the sum running over the whole
    /// message alphabet.
    pub fn d1(&self) -> BigRational {
        let mc = self.message_count as i128;
        let mut num: i128 = 0;
        for row in self.cells.values() {
            let cz: i128 = row.values().map(|&c| c as i128).sum();
            let mut seen = 0i128;
            for &c in row.values() {
                num += (cz - mc * c as i128).abs();
                seen += 1;
            }
            num += (mc - seen) * cz;
        }
        BigRational::new(BigInt::from(num), BigInt::from(self.total as i128 * mc))
    }

    /// True when every observation pins down the message.
    pub fn message_determined(&self) -> bool {
        self.cells.values().all(|row| row.len() == 1)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PerfectlySecure,
    ImperfectlySecure,
    Insecure,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrategyLeakage {
    pub id: String,
    pub strategy: AttackStrategy,
    pub leakage_bits: f64,
    pub leakage_exact_zero: bool,
    #[serde(serialize_with = "ser_rational")]
    pub d1: BigRational,
    pub d1_float: f64,
    #[serde(skip)]
    pub dist: JointDist,
    #[serde(skip)]
    pub scaled_leakage: LogSum,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl StrategyLeakage {
    pub fn new(id: String, strategy: AttackStrategy, dist: JointDist) -> StrategyLeakage {
        let d1 = dist.d1();
        StrategyLeakage {
            id,
            strategy,
            leakage_bits: dist.mutual_information(),
            leakage_exact_zero: dist.is_independent(),
            d1_float: rational_to_f64(&d1),
            d1,
            scaled_leakage: dist.scaled_leakage(),
            dist,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LeakageReport {
    pub schema_version: u32,
    pub class: AttackClass,
    pub worlds: u64,
    pub message_entropy_bits: f64,
    pub decodable: bool,
    pub strategies: Vec<StrategyLeakage>,
    pub max_leakage_bits: f64,
    pub argmax: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active_sweep: Option<SweepSummary>,
}

impl LeakageReport {
    /// Builds the report, picking the first strategy of maximal exact leakage.
    pub fn from_rows(
        class: AttackClass,
        table: &WorldTable,
        strategies: Vec<StrategyLeakage>,
        active_sweep: Option<SweepSummary>,
    ) -> LeakageReport {
        let mut argmax = 0;
        for (i, row) in strategies.iter().enumerate().skip(1) {
            let best = &strategies[argmax];
            // Rows share the world count, so scaled leakages compare directly.
            if row.scaled_leakage.cmp_exact(&best.scaled_leakage) == Ordering::Greater {
                argmax = i;
            }
        }
        let verdict = match strategies.get(argmax) {
            None => Verdict::PerfectlySecure,
            Some(row) if row.leakage_exact_zero => Verdict::PerfectlySecure,
            Some(row) if row.dist.message_determined() => Verdict::Insecure,
            Some(_) => Verdict::ImperfectlySecure,
        };
        LeakageReport {
            schema_version: 1,
            class,
            worlds: table.worlds as u64,
            message_entropy_bits: table.message_entropy_bits(),
            decodable: table.decodable(),
            max_leakage_bits: strategies.get(argmax).map_or(0.0, |r| r.leakage_bits),
            argmax,
            verdict,
            strategies,
            active_sweep,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// One row per strategy: id, leakage bits, d1, exact-zero flag.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["strategy", "leakage_bits", "d1", "d1_float", "leakage_exact_zero"])
            .expect("in-memory csv");
        for row in &self.strategies {
            w.write_record([
                row.id.clone(),
                format!("{}", row.leakage_bits),
                row.d1.to_string(),
                format!("{}", row.d1_float),
                row.leakage_exact_zero.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
    }
}

/// Joint distribution of the message and Eve's view under `strategy`.
pub fn joint_distribution(
    spec: &NetworkSpec,
    code: &NetworkCode,
    strategy: &AttackStrategy,
) -> Result<JointDist, SecrecyError> {
    attack::validate(spec, strategy)?;
    if strategy.is_active() {
        return Ok(attack::active_distribution(spec, code, strategy)?);
    }
    let table = WorldTable::enumerate(spec, code)?;
    Ok(attack::passive_distribution(&table, strategy)?)
}

/// Exact leakage report for the given attack class.
///
/// A0 lists every deterministic tap set; A1 and A2 report the optimal
/// adaptive tree; A3 adds the worst strategy of the active sweep to the
/// optimal time-ordered tree.
pub fn classify_security(
    spec: &NetworkSpec,
    code: &NetworkCode,
    class: AttackClass,
) -> Result<LeakageReport, SecrecyError> {
    let table = WorldTable::enumerate(spec, code)?;
    classify_with_table(spec, code, &table, class)
}

pub fn classify_with_table(
    spec: &NetworkSpec,
    code: &NetworkCode,
    table: &WorldTable,
    class: AttackClass,
) -> Result<LeakageReport, SecrecyError> {
    match class {
        AttackClass::A0 => {
            let rows = spec
                .attack_family()?
                .into_iter()
                .map(|s| {
                    let dist = table.view(&s);
                    StrategyLeakage::new(attack::set_id(&s), AttackStrategy::Deterministic { edges: s }, dist)
                })
                .collect();
            Ok(LeakageReport::from_rows(class, table, rows, None))
        }
        AttackClass::A1 | AttackClass::A2 => {
            let (strategy, dist) = attack::optimal_with_table(spec, table, class)?;
            let row = StrategyLeakage::new("optimal".into(), strategy, dist);
            Ok(LeakageReport::from_rows(class, table, vec![row], None))
        }
        AttackClass::A3 => {
            let (strategy, dist) = attack::optimal_with_table(spec, table, AttackClass::A1)?;
            let mut rows = vec![StrategyLeakage::new("optimal_passive".into(), strategy, dist)];
            let sweep = attack::active_sweep(spec, code, table, &attack::SweepConfig::default())?;
            if let Some((strategy, dist)) = sweep.worst.clone() {
                rows.push(StrategyLeakage::new("worst_active".into(), strategy, dist));
            }
            Ok(LeakageReport::from_rows(class, table, rows, Some(sweep.summary)))
        }
    }
}

// ---------------------------------------------------------------------------
// Structural checks

/// Whether `H(M | Y_s = z)` is the same for every observed `z`, for every
/// admissible tap set `s`. Under this condition adaptive attacks gain
/// nothing over the best deterministic one.
pub fn constant_conditional_entropy(spec: &NetworkSpec, table: &WorldTable) -> Result<bool, SecrecyError> {
    for s in spec.attack_family()? {
        let dist = table.view(&s);
        // n_z * H(M | Z = z); compare H across z by cross-multiplying.
        let rows: Vec<(u64, LogSum)> = dist
            .cells
            .values()
            .map(|row| (row.values().sum::<u64>(), scaled_entropy(row.values().copied())))
            .collect();
        let (n0, h0) = &rows[0];
        for (n, h) in &rows[1..] {
            let lhs = h.scaled(&BigInt::from(*n0));
            let rhs = h0.scaled(&BigInt::from(*n));
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// For a linear map `x = f(m, l)` whose first `message_len` inputs are the
/// message, checks `P(m, x) = P(m - g1(x), 0)` for every message and every
/// reachable `x`, where `g(x)` is the canonical preimage returned by the
/// linear solver (free variables zero).
pub fn shift_invariance_holds(f: &FieldMatrix, message_len: usize) -> Result<bool, SecrecyError> {
    let field = &f.field;
    let q = field.q() as u64;
    let total = q
        .checked_pow(f.cols as u32)
        .filter(|&t| t <= 1 << 22)
        .ok_or_else(|| SecrecyError::TooLarge("linear map domain exceeds 2^22 points".into()))?;
    let mut counts: HashMap<(Vec<u32>, Vec<u32>), u64> = HashMap::new();
    let mut images: BTreeMap<Vec<u32>, ()> = BTreeMap::new();
    let mut input = vec![0u32; f.cols];
    for idx in 0..total {
        let mut rest = idx;
        for slot in input.iter_mut() {
            *slot = (rest % q) as u32;
            rest /= q;
        }
        let x = f.mul_vec(&input).map_err(NetError::from)?;
        images.insert(x.clone(), ());
        *counts.entry((input[..message_len].to_vec(), x)).or_insert(0) += 1;
    }
    let zero_x = vec![0u32; f.rows];
    let messages = q.pow(message_len as u32);
    for x in images.keys() {
        let g = f.solve(x).map_err(NetError::from)?;
        for midx in 0..messages {
            let m = unpack(midx as u32, q as u32, message_len);
            let shifted: Vec<u32> = m.iter().zip(&g).map(|(&a, &b)| field.sub(a, b)).collect();
            let lhs = counts.get(&(m, x.clone())).copied().unwrap_or(0);
            let rhs = counts.get(&(shifted, zero_x.clone())).copied().unwrap_or(0);
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Outcome of a converse-bound check.
#[derive(Clone, Debug, Serialize)]
pub struct ConverseCheck {
    pub max_leakage_bits: f64,
    pub bound_bits: f64,
    pub holds: bool,
}

/// Checks `max_s I(M; Y_s) >= H(M) - n log2(q) * capacity` (bits), where
/// `capacity` is in units of edge-symbol logarithms per channel use.
pub fn converse_bound(
    spec: &NetworkSpec,
    table: &WorldTable,
    capacity: &BigRational,
) -> Result<ConverseCheck, SecrecyError> {
    let max_leakage_bits = spec
        .attack_family()?
        .iter()
        .map(|s| table.view(s).mutual_information())
        .fold(0.0, f64::max);
    let per_use = table.n as f64 * (table.q as f64).log2();
    let bound_bits = table.message_entropy_bits() - per_use * rational_to_f64(capacity);
    Ok(ConverseCheck { max_leakage_bits, bound_bits, holds: max_leakage_bits >= bound_bits - 1e-9 })
}

// ---------------------------------------------------------------------------
// Entropy inequalities

/// A finite distribution given by integer weights. Coordinate 0 of each
/// outcome is the conditioning variable `X`; coordinates `1..=k` are `Y_1..Y_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDist {
    pub k: usize,
    pub outcomes: Vec<(Vec<u32>, u64)>,
}

impl FiniteDist {
    pub fn total(&self) -> u64 {
        self.outcomes.iter().map(|(_, w)| w).sum()
    }

    /// `total * H(coords)` exactly, and the float entropy in bits.
    fn entropy_of(&self, coords: &[usize]) -> (LogSum, f64) {
        let mut groups: HashMap<Vec<u32>, u64> = HashMap::new();
        for (o, w) in &self.outcomes {
            if *w > 0 {
                *groups.entry(coords.iter().map(|&c| o[c]).collect()).or_insert(0) += w;
            }
        }
        let t = self.total();
        let mut counts: Vec<u64> = groups.into_values().collect();
        counts.sort_unstable();
        let float = (n_log_n(t) - counts.iter().map(|&c| n_log_n(c)).sum::<f64>()) / t as f64;
        (scaled_entropy(counts), float)
    }

    /// `H(Y_S | X)` where `ys` are 1-based indices into `Y`.
    fn conditional(&self, ys: &[usize], given: &[usize]) -> (LogSum, f64) {
        let mut both: Vec<usize> = given.to_vec();
        both.extend_from_slice(ys);
        let (mut s, f) = self.entropy_of(&both);
        let (g, fg) = self.entropy_of(given);
        s.sub(&g);
        (s, f - fg)
    }
}

/// Result of comparing the two sides of an entropy inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// The float sides were within 1e-9 and the exact comparison decided.
    pub near_tie: bool,
}

fn compare_sides(lhs: (LogSum, f64), rhs: (LogSum, f64), want: Ordering) -> LemmaCheck {
    let near_tie = (lhs.1 - rhs.1).abs() <= 1e-9;
    let ord = if near_tie {
        lhs.0.cmp_exact(&rhs.0)
    } else {
        lhs.1.partial_cmp(&rhs.1).unwrap_or(Ordering::Equal)
    };
    LemmaCheck { lhs: lhs.1, rhs: rhs.1, holds: ord == want || ord == Ordering::Equal, near_tie }
}

/// `sum_{S in cover} H(Y_S | X) >= h * H(Y_[k] | X)` for a cover of `[k]`
/// in which every index lies in exactly `h` members.
pub fn check_entropy_cover_lemma(
    dist: &FiniteDist,
    cover: &[Vec<usize>],
    h: usize,
) -> Result<LemmaCheck, SecrecyError> {
    let k = dist.k;
    for i in 1..=k {
        let hits = cover.iter().filter(|s| s.contains(&i)).count();
        if hits != h {
            return Err(SecrecyError::BadCover(format!("index {i} lies in {hits} members, expected {h}")));
        }
    }
    if cover.iter().flatten().any(|&i| i == 0 || i > k) {
        return Err(SecrecyError::BadCover("member index outside 1..=k".into()));
    }
    let mut lhs = (LogSum::zero(), 0.0);
    for s in cover {
        let (e, f) = dist.conditional(s, &[0]);
        lhs.0.add(&e);
        lhs.1 += f;
    }
    let all: Vec<usize> = (1..=k).collect();
    let (e, f) = dist.conditional(&all, &[0]);
    let rhs = (e.scaled(&BigInt::from(h)), f * h as f64);
    Ok(compare_sides(lhs, rhs, Ordering::Greater))
}

/// `sum_{|S| = r} H(Y_S | Y_{S^c}, X) <= C(k-1, r-1) * H(Y_[k] | X)`.
pub fn check_subset_conditional_lemma(dist: &FiniteDist, r: usize) -> Result<LemmaCheck, SecrecyError> {
    let k = dist.k;
    if r == 0 || r > k {
        return Err(SecrecyError::BadCover(format!("subset size {r} outside 1..={k}")));
    }
    let all: Vec<usize> = (1..=k).collect();
    let mut lhs = (LogSum::zero(), 0.0);
    for s in crate::netmodel::subsets(&all, r) {
        let mut given = vec![0];
        given.extend(all.iter().filter(|i| !s.contains(i)));
        let (e, f) = dist.conditional(&s, &given);
        lhs.0.add(&e);
        lhs.1 += f;
    }
    let binom = binomial(k - 1, r - 1);
    let (e, f) = dist.conditional(&all, &[0]);
    let rhs = (e.scaled(&BigInt::from(binom)), f * binom as f64);
    Ok(compare_sides(lhs, rhs, Ordering::Less))
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::build_fixture;

    fn pad_dist() -> JointDist {
        // Y = M + L over GF(2)
        JointDist::from_pairs(2, (0..4u32).map(|w| (w & 1, vec![(w & 1) ^ (w >> 1)])))
    }

    fn copy_dist() -> JointDist {
        JointDist::from_pairs(2, (0..2u32).map(|m| (m, vec![m])))
    }

    #[test]
    fn fig1_first_pair() {
        let (spec, code) = build_fixture("fig1_nonlinear").unwrap();
        let table = WorldTable::enumerate(&spec, &code).unwrap();
        assert_eq!(table.worlds, 4);
        assert!(table.decodable());
        let dist = table.view(&[1, 3]);
        let quarter = BigRational::new(1.into(), 4.into());
        assert_eq!(dist.prob(0, &[0, 0]), quarter);
        assert_eq!(dist.prob(1, &[0, 0]), quarter);
        assert_eq!(dist.prob(0, &[1, 0]), quarter);
        assert_eq!(dist.prob(1, &[1, 1]), quarter);
        assert!((dist.mutual_information() - 0.5).abs() < 1e-12);
        assert_eq!(dist.d1(), BigRational::new(1.into(), 2.into()));
        assert!(!dist.is_independent());
    }

    #[test]
    fn pad_and_copy() {
        let pad = pad_dist();
        assert!(pad.is_independent());
        assert_eq!(pad.mutual_information(), 0.0);
        assert!(pad.d1().is_zero());
        assert!(pad.scaled_leakage().is_zero());
        let copy = copy_dist();
        assert!((copy.mutual_information() - 1.0).abs() < 1e-12);
        assert_eq!(copy.d1(), BigRational::from_integer(1.into()));
        assert!(copy.message_determined());
    }

    #[test]
    fn empty_view_is_message_marginal() {
        let (spec, code) = build_fixture("fig1_nonlinear").unwrap();
        let table = WorldTable::enumerate(&spec, &code).unwrap();
        let dist = table.view(&[]);
        assert_eq!(dist.cells.len(), 1);
        assert!(dist.is_independent());
    }

    #[test]
    fn logsum_exactness() {
        // 3 log 2 = log 8
        let mut a = LogSum::log_of(2, 3);
        a.sub(&LogSum::log_of(8, 1));
        assert!(a.is_zero());
        // log 3 vs log 2: clear sign
        let mut b = LogSum::log_of(3, 1);
        b.sub(&LogSum::log_of(2, 1));
        assert_eq!(b.signum(), Ordering::Greater);
        // 2^19 vs 3^12 (524288 vs 531441): close but decidable
        let mut c = LogSum::log_of(2, 19);
        c.sub(&LogSum::log_of(3, 12));
        assert_eq!(c.signum(), Ordering::Less);
    }

    #[test]
    fn lemma_examples() {
        // Y1, Y2, Y3 i.i.d. uniform bits, X constant.
        let iid = FiniteDist {
            k: 3,
            outcomes: (0..8u32).map(|w| (vec![0, w & 1, (w >> 1) & 1, w >> 2], 1)).collect(),
        };
        let cover = crate::netmodel::subsets(&[1usize, 2, 3], 2);
        let check = check_entropy_cover_lemma(&iid, &cover, 2).unwrap();
        assert!(check.holds && check.near_tie);
        assert!((check.lhs - check.rhs).abs() < 1e-12);
        let check = check_subset_conditional_lemma(&iid, 2).unwrap();
        assert!(check.holds && check.near_tie);

        let same = FiniteDist { k: 3, outcomes: (0..2u32).map(|y| (vec![0, y, y, y], 1)).collect() };
        let check = check_entropy_cover_lemma(&same, &cover, 2).unwrap();
        assert!(check.holds && !check.near_tie);
        assert!((check.lhs - 3.0).abs() < 1e-12 && (check.rhs - 2.0).abs() < 1e-12);

        let bad = vec![vec![1, 2]];
        assert!(matches!(check_entropy_cover_lemma(&iid, &bad, 1), Err(SecrecyError::BadCover(_))));
    }

    #[test]
    fn shift_invariance_on_small_map() {
        let f = crate::gf::field_make(3, 1).unwrap();
        let m = FieldMatrix::from_rows(&f, &[vec![1, 2, 0], vec![0, 1, 1]]).unwrap();
        assert!(shift_invariance_holds(&m, 1).unwrap());
    }

    #[test]
    fn pack_round_trip() {
        assert_eq!(pack(&[1, 2, 0], 3), 7);
        assert_eq!(unpack(7, 3, 3), vec![1, 2, 0]);
    }
}
