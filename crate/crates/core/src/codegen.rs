//! Secure code constructions: wiretap-II vectors, the one-hop code, relay
//! chains under unlimited, absent and budgeted intermediate randomness,
//! single-source multicast, and an exhaustive search over scalar linear
//! relay codes.
//!
//! Every builder works on linear forms: each symbol a node emits is a
//! sparse combination of that node's local inputs, so compiling a node is
//! just laying its forms out as matrix rows.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::attack::{AttackClass, AttackError, SweepSummary};
use crate::capacity::{
    max_prime_power, multicast_region, randomness_budget, region_contains, relay_capacity, CapacityError,
    MulticastParams, Randomness, Rational, RelayParams,
};
use crate::gf::{field_make, Field, FieldMatrix, GfError};
use crate::netmodel::{
    build_multicast, build_relay, prime_power_decomposition, subsets, DecoderCode, LocalMap, MessageSpec,
    NetError, NetworkCode, NetworkSpec, NodeCode,
};
use crate::secrecy::{classify_with_table, SecrecyError, Verdict, WorldTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodegenError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("construction failed its own check: {0}")]
    VerificationFailed(String),
    #[error("no block length up to the search limit works: {0}")]
    ScaleExceeded(String),
    #[error("rate tuple outside the capacity region: {0}")]
    RegionViolation(String),
    #[error("search too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Secrecy(#[from] SecrecyError),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

/// Largest block length (code symbols per edge) the builders try.
pub const MAX_BLOCK: usize = 4096;

/// Above this many injections the vector check samples instead.
const EXHAUSTIVE_INJECTIONS: u64 = 1_000_000;
const SAMPLED_SELECTIONS: usize = 10_000;

// ---------------------------------------------------------------------------
// Linear forms

/// Sparse linear combination of local input coordinates.
type Form = BTreeMap<usize, u32>;

fn unit(i: usize) -> Form {
    BTreeMap::from([(i, 1)])
}

/// `acc += c * x`.
fn add_scaled(f: &Field, acc: &mut Form, c: u32, x: &Form) {
    if c == 0 {
        return;
    }
    for (&i, &v) in x {
        let slot = acc.entry(i).or_insert(0);
        *slot = f.add(*slot, f.mul(c, v));
        if *slot == 0 {
            acc.remove(&i);
        }
    }
}

fn forms_to_matrix(f: &Field, forms: &[Form], width: usize) -> FieldMatrix {
    let mut m = FieldMatrix::zeros(f, forms.len(), width);
    for (r, form) in forms.iter().enumerate() {
        for (&c, &v) in form {
            m.set(r, c, v);
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Wiretap-II vectors

/// `r` vectors in `field^k` with `v_i` equal to the `i`-th unit vector on the
/// first `r` coordinates and every `r` columns linearly independent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WiretapVectors {
    pub field: Field,
    pub k: usize,
    pub r: usize,
    pub vectors: Vec<Vec<u32>>,
    /// Extension degree over the base alphabet.
    pub n_factor: u32,
}

impl WiretapVectors {
    /// The `r x k` matrix whose rows are the vectors.
    pub fn matrix(&self) -> FieldMatrix {
        if self.r == 0 {
            return FieldMatrix::zeros(&self.field, 0, self.k);
        }
        FieldMatrix::from_rows(&self.field, &self.vectors).expect("rows share a length")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema_version": 1,
            "field": self.field.spec(),
            "k": self.k,
            "r": self.r,
            "n_factor": self.n_factor,
            "matrix": self.vectors,
        })
    }

    /// Rank-checks the column selections; returns how many were checked.
    pub fn verify(&self) -> Result<u64, CodegenError> {
        check_selections(&self.field, &self.vectors, self.k, self.r)
    }
}

/// Extension degree so that a Vandermonde layout has `k` distinct points.
/// One vector of ones, `[I | 1]` and the identity need no extension.
fn degree_needed(q: u64, k: usize, r: usize) -> u32 {
    if r <= 1 || k <= r + 1 {
        return 1;
    }
    let mut t = 1;
    let mut size = q;
    while size < k as u64 {
        size *= q;
        t += 1;
    }
    t
}

fn build_vectors(f: &Field, k: usize, r: usize) -> Result<Vec<Vec<u32>>, CodegenError> {
    let rows = match r {
        0 => Vec::new(),
        _ if r == k => (0..r).map(|i| (0..k).map(|j| u32::from(i == j)).collect()).collect(),
        1 => vec![vec![1; k]],
        _ if k == r + 1 => (0..r).map(|i| (0..k).map(|j| u32::from(i == j || j == r)).collect()).collect(),
        _ => {
            if (f.q() as usize) < k {
                return Err(CodegenError::BadParams(format!("GF({}) has fewer than {k} points", f.q())));
            }
            let mut g = FieldMatrix::zeros(f, r, k);
            for i in 0..r {
                for j in 0..k {
                    g.set(i, j, f.pow(j as u32, i as u64));
                }
            }
            let head = g.select_columns(&(0..r).collect::<Vec<_>>()).inverse()?;
            head.mul(&g)?.to_rows()
        }
    };
    check_selections(f, &rows, k, r)?;
    Ok(rows)
}

/// Every `r`-column selection must be invertible. Column order does not
/// change invertibility, so each subset stands for its `r!` injections.
fn check_selections(f: &Field, rows: &[Vec<u32>], k: usize, r: usize) -> Result<u64, CodegenError> {
    if r == 0 {
        return Ok(0);
    }
    let m = FieldMatrix::from_rows(f, rows)?;
    for i in 0..r {
        for j in 0..r {
            if m.get(i, j) != u32::from(i == j) {
                return Err(CodegenError::VerificationFailed(format!("vector {} is not systematic", i + 1)));
            }
        }
    }
    let injections = (0..r as u64).fold(1u64, |acc, i| acc.saturating_mul(k as u64 - i));
    let columns: Vec<usize> = (0..k).collect();
    let selections: Vec<Vec<usize>> = if injections <= EXHAUSTIVE_INJECTIONS {
        subsets(&columns, r)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x3a11_c0de);
        (0..SAMPLED_SELECTIONS)
            .map(|_| {
                let mut s = sample(&mut rng, k, r).into_vec();
                s.sort_unstable();
                s
            })
            .collect()
    };
    for s in &selections {
        if !m.select_columns(s).is_invertible() {
            return Err(CodegenError::VerificationFailed(format!("columns {s:?} are dependent")));
        }
    }
    Ok(if injections <= EXHAUSTIVE_INJECTIONS { injections } else { selections.len() as u64 })
}

fn base_field(q: u64) -> Result<(u32, u32), CodegenError> {
    prime_power_decomposition(q)
        .map(|(p, m)| (p as u32, m))
        .ok_or_else(|| CodegenError::BadParams(format!("{q} is not a prime power")))
}

pub fn wiretap2_vectors(k: usize, r: usize, q: u64) -> Result<WiretapVectors, CodegenError> {
    if k == 0 || r > k {
        return Err(CodegenError::BadParams(format!("need k >= 1 and 0 <= r <= k, got k={k}, r={r}")));
    }
    let (p, m) = base_field(q)?;
    let t = degree_needed(q, k, r);
    let field = field_make(p, m * t)?;
    let vectors = build_vectors(&field, k, r)?;
    Ok(WiretapVectors { field, k, r, vectors, n_factor: t })
}

// ---------------------------------------------------------------------------
// One wiretap hop, position by position

/// At every used position the `k` edges carry `r` pads on the first edges
/// and `payload + sum_i v_i pad_i` on the rest.
struct HopCoder {
    k: usize,
    r: usize,
    vectors: Vec<Vec<u32>>,
}

impl HopCoder {
    fn new(f: &Field, k: usize, r: usize) -> Result<HopCoder, CodegenError> {
        Ok(HopCoder { k, r, vectors: build_vectors(f, k, r)? })
    }

    fn width(&self) -> usize {
        self.k - self.r
    }

    fn positions_for(&self, letters: usize) -> usize {
        letters.div_ceil(self.width())
    }

    /// Codeword forms `out[edge][position]`; positions from `used` on and
    /// payload slots past the end carry zero. `pads` must hold `r * used`.
    fn encode(&self, f: &Field, payload: &[Form], pads: &[Form], used: usize, n: usize) -> Vec<Vec<Form>> {
        debug_assert_eq!(pads.len(), self.r * used);
        debug_assert!(payload.len() <= self.width() * used);
        let w = self.width();
        let mut out = vec![vec![Form::new(); n]; self.k];
        for s in 0..used {
            for i in 0..self.k {
                out[i][s] = if i < self.r {
                    pads[s * self.r + i].clone()
                } else {
                    let mut form = payload.get(s * w + i - self.r).cloned().unwrap_or_default();
                    for (j, v) in self.vectors.iter().enumerate() {
                        add_scaled(f, &mut form, v[i], &pads[s * self.r + j]);
                    }
                    form
                };
            }
        }
        out
    }

    /// Payload letters `0..len` as forms over the receiver's inputs;
    /// `input(edge, position)` names the coordinate holding that symbol.
    fn decode(&self, f: &Field, input: impl Fn(usize, usize) -> usize, len: usize) -> Vec<Form> {
        let w = self.width();
        (0..len)
            .map(|idx| {
                let (s, t) = (idx / w, idx % w);
                let mut form = unit(input(self.r + t, s));
                for (j, v) in self.vectors.iter().enumerate() {
                    add_scaled(f, &mut form, f.neg(v[self.r + t]), &unit(input(j, s)));
                }
                form
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Built codes

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceCase {
    Base,
    Case1,
    Case2,
    Case3,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub layer: usize,
    pub case: TraceCase,
    pub note: String,
}

/// A constructed code with the bookkeeping needed to audit it.
#[derive(Clone, Debug)]
pub struct BuiltCode {
    pub construction: String,
    pub spec: NetworkSpec,
    pub code: NetworkCode,
    /// Prime power the code field extends.
    pub q: u64,
    /// Extension degree of the code field over GF(q).
    pub extension: u32,
    /// Achieved rate per message, units of `log q` per channel use.
    pub rates: Vec<Rational>,
    /// Name of the formula the code is built to meet.
    pub target: String,
    /// Total rate the formula predicts.
    pub target_value: Rational,
    /// Fresh scramble symbols per node (sources included).
    pub scramble_usage: BTreeMap<usize, usize>,
    /// Allowed fresh symbols per intermediate node; `None` is unlimited.
    pub scramble_budget: BTreeMap<usize, Option<usize>>,
    pub trace: Vec<TraceStep>,
}

impl BuiltCode {
    pub fn block_length(&self) -> usize {
        self.code.n
    }

    pub fn channel_uses(&self) -> usize {
        self.code.n * self.extension as usize
    }

    pub fn total_rate(&self) -> Rational {
        self.rates.iter().fold(Rational::zero(), |a, b| a + b)
    }

    pub fn rate_bits(&self) -> f64 {
        crate::capacity::to_f64(&self.total_rate()) * (self.q as f64).log2()
    }

    /// Intermediate nodes stay within their randomness budgets.
    pub fn audit_scrambles(&self) -> Result<(), CodegenError> {
        for (&node, used) in self.code.intermediate_scrambles(&self.spec).iter() {
            match self.scramble_budget.get(&node) {
                Some(None) => {}
                Some(Some(limit)) if used <= limit => {}
                Some(Some(limit)) => {
                    return Err(CodegenError::VerificationFailed(format!(
                        "node {node} draws {used} fresh symbols, budget {limit}"
                    )))
                }
                None => {
                    return Err(CodegenError::VerificationFailed(format!("node {node} has no randomness budget")))
                }
            }
        }
        Ok(())
    }

    /// The code JSON with construction metadata and the `trace` array.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.code.to_json();
        let obj = v.as_object_mut().expect("code JSON is an object");
        obj.insert("construction".into(), json!(self.construction));
        obj.insert("q".into(), json!(self.q));
        obj.insert("extension".into(), json!(self.extension));
        obj.insert("channel_uses".into(), json!(self.channel_uses()));
        obj.insert("rates".into(), json!(self.rates.iter().map(|r| r.to_string()).collect::<Vec<_>>()));
        obj.insert("rate".into(), json!(self.total_rate().to_string()));
        obj.insert("rate_bits".into(), json!(self.rate_bits()));
        obj.insert("target".into(), json!(self.target));
        obj.insert("target_value".into(), json!(self.target_value.to_string()));
        obj.insert("scramble_usage".into(), json!(self.scramble_usage));
        obj.insert("scramble_budget".into(), json!(self.scramble_budget));
        obj.insert("trace".into(), json!(self.trace));
        obj.insert("network".into(), self.spec.to_json());
        v
    }
}

fn scramble_usage(code: &NetworkCode) -> BTreeMap<usize, usize> {
    code.nodes.iter().map(|n| (n.node, n.scrambles)).collect()
}

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Linear code field: GF(q^t) as an extension of the alphabet's field.
fn code_field(q: u64, t: u32) -> Result<Field, CodegenError> {
    let (p, m) = base_field(q)?;
    Ok(field_make(p, m * t)?)
}

/// The alphabet's prime power, or the largest one below it.
fn usable_prime_power(d: u64) -> Result<u64, CodegenError> {
    if prime_power_decomposition(d).is_some() {
        Ok(d)
    } else {
        Ok(max_prime_power(d, 1)?)
    }
}

// ---------------------------------------------------------------------------
// One hop

pub fn onehop_code(k: usize, r: usize, q: u64, n_prime: usize) -> Result<BuiltCode, CodegenError> {
    if k <= r || n_prime == 0 {
        return Err(CodegenError::BadParams(format!("need k > r and n' >= 1, got k={k}, r={r}, n'={n_prime}")));
    }
    let t = degree_needed(q, k, r);
    let field = code_field(q, t)?;
    let spec = build_relay(1, &[k], &[r], q, &[])?;
    let hop = HopCoder::new(&field, k, r)?;
    let n = n_prime;
    let m = hop.width() * n;
    let payload: Vec<Form> = (0..m).map(unit).collect();
    let pads: Vec<Form> = (0..r * n).map(|i| unit(m + i)).collect();
    let word = hop.encode(&field, &payload, &pads, n, n);
    let rows: Vec<Form> = word.into_iter().flatten().collect();
    let source = NodeCode { node: 1, scrambles: r * n, map: LocalMap::Linear(forms_to_matrix(&field, &rows, m + r * n)) };
    let dec = hop.decode(&field, |i, s| i * n + s, m);
    let decoder = DecoderCode { node: 2, messages: vec![0], map: LocalMap::Linear(forms_to_matrix(&field, &dec, k * n)) };
    let code = NetworkCode {
        n,
        field,
        messages: vec![MessageSpec { source: 1, terminal: 2, symbols: m }],
        nodes: vec![source],
        decoders: vec![decoder],
    };
    Ok(BuiltCode {
        construction: "onehop".into(),
        scramble_usage: scramble_usage(&code),
        spec,
        code,
        q,
        extension: t,
        rates: vec![ratio(m, n)],
        target: "k - r".into(),
        target_value: ratio(k - r, 1),
        scramble_budget: BTreeMap::new(),
        trace: vec![TraceStep { layer: 1, case: TraceCase::Base, note: format!("{r} pads and {} message symbols per position", k - r) }],
    })
}

// ---------------------------------------------------------------------------
// Relay chains

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayMode {
    FullRandom,
    NoRandom,
    Limited,
}

impl FromStr for RelayMode {
    type Err = CodegenError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full_random" => Ok(RelayMode::FullRandom),
            "no_random" => Ok(RelayMode::NoRandom),
            "limited" => Ok(RelayMode::Limited),
            other => Err(CodegenError::BadParams(format!("unknown relay mode {other:?}"))),
        }
    }
}

impl fmt::Display for RelayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelayMode::FullRandom => "full_random",
            RelayMode::NoRandom => "no_random",
            RelayMode::Limited => "limited",
        })
    }
}

/// Symbol counts of a relay code at block length `n`.
///
/// On hop `j` the payload is the message plus `forward[j]` random symbols
/// the receiver will reuse as pads; `used[j]` positions are occupied and the
/// sender draws `fresh[j]` new symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
struct RelayPlan {
    n: usize,
    m: usize,
    used: Vec<usize>,
    forward: Vec<usize>,
    fresh: Vec<usize>,
}

/// Works backwards from the terminal: each sender needs `r_j * used_j`
/// pads plus the forwarded symbols; whatever its budget cannot cover is
/// requested from the previous hop.
fn plan_relay(k: &[usize], r: &[usize], budget: &[Option<usize>], n: usize, m: usize) -> Option<RelayPlan> {
    let c = k.len();
    let mut plan = RelayPlan { n, m, used: vec![0; c], forward: vec![0; c], fresh: vec![0; c] };
    let mut carry = 0;
    for j in (0..c).rev() {
        plan.forward[j] = carry;
        let used = (m + carry).div_ceil(k[j] - r[j]);
        if used > n {
            return None;
        }
        plan.used[j] = used;
        let demand = r[j] * used + carry;
        let fresh = if j == 0 { demand } else { budget[j].map_or(demand, |b| demand.min(b)) };
        plan.fresh[j] = fresh;
        carry = demand - fresh;
    }
    Some(plan)
}

fn usize_of(r: &Rational) -> Option<usize> {
    if r.is_integer() && !r.is_negative() {
        r.to_integer().to_usize()
    } else {
        None
    }
}

/// Classifies each hop by which bound of the limited-randomness induction
/// is tight. `upper[j] = (k_j - r_j)/k_j h^j`, `lower[j] = min_{i<=j} upper[i]`.
fn relay_trace(params: &RelayParams, effective_gamma: &[u64], plan: &RelayPlan) -> Vec<TraceStep> {
    let p = RelayParams { gamma: effective_gamma.to_vec(), ..params.clone() };
    let h = randomness_budget(&p);
    let upper: Vec<Rational> = (0..p.c)
        .map(|j| ratio((p.k[j] - p.r[j]) as usize, p.k[j] as usize) * &h[j])
        .collect();
    let mut lower: Vec<Rational> = Vec::with_capacity(p.c);
    for j in 0..p.c {
        let l = if j == 0 || upper[j] < lower[j - 1] { upper[j].clone() } else { lower[j - 1].clone() };
        lower.push(l);
    }
    (0..p.c)
        .map(|j| {
            let diff = Rational::from_integer(BigInt::from(p.k[j] - p.r[j]));
            let case = if j == 0 {
                TraceCase::Base
            } else if lower[j] == upper[j] && upper[j] == diff {
                TraceCase::Case1
            } else if lower[j] == upper[j] {
                TraceCase::Case2
            } else {
                TraceCase::Case3
            };
            TraceStep {
                layer: j + 1,
                case,
                note: format!(
                    "upper {} lower {}; {} positions, {} pads, {} forwarded, {} fresh",
                    upper[j],
                    lower[j],
                    plan.used[j],
                    p.r[j] as usize * plan.used[j],
                    plan.forward[j],
                    plan.fresh[j]
                ),
            }
        })
        .collect()
}

/// Relay code meeting `C1`, `C2` or `C_gamma` exactly at the smallest block
/// length that makes every symbol count integral.
pub fn relay_code(params: &RelayParams, mode: RelayMode) -> Result<BuiltCode, CodegenError> {
    params.validate()?;
    let c = params.c;
    if let Some(j) = (0..c).find(|&j| params.k[j] <= params.r[j]) {
        return Err(CodegenError::BadParams(format!("hop {}: need k > r to carry anything", j + 1)));
    }
    let k: Vec<usize> = params.k.iter().map(|&x| x as usize).collect();
    let r: Vec<usize> = params.r.iter().map(|&x| x as usize).collect();
    let caps = relay_capacity(params)?;
    let (target_name, target) = match mode {
        RelayMode::FullRandom => ("C1", caps.c1),
        RelayMode::NoRandom => ("C2", caps.c2),
        RelayMode::Limited => ("C_gamma", caps.c_gamma),
    };
    let effective_gamma: Vec<u64> = match mode {
        RelayMode::FullRandom => params.k.clone(),
        RelayMode::NoRandom => vec![0; c],
        RelayMode::Limited => params.gamma.clone(),
    };
    let q = usable_prime_power(params.d)?;
    let t = k.iter().zip(&r).fold(1u32, |acc, (&kk, &rr)| acc.lcm(&degree_needed(q, kk, rr)));
    let field = code_field(q, t)?;

    let den = target.denom().to_usize().filter(|&d| d <= MAX_BLOCK).ok_or_else(|| {
        CodegenError::ScaleExceeded(format!("capacity {target} needs a block beyond {MAX_BLOCK}"))
    })?;
    let plan = (1..)
        .map(|mult| mult * den)
        .take_while(|&n| n <= MAX_BLOCK)
        .find_map(|n| {
            let budget: Vec<Option<usize>> = match mode {
                RelayMode::FullRandom => vec![None; c],
                _ => effective_gamma.iter().map(|&g| Some(g as usize * n)).collect(),
            };
            let m = usize_of(&(&target * Rational::from_integer(BigInt::from(n))))?;
            plan_relay(&k, &r, &budget, n, m)
        })
        .ok_or_else(|| CodegenError::ScaleExceeded(format!("no block length up to {MAX_BLOCK} carries {target}")))?;

    let spec_gamma: Vec<u32> = effective_gamma.iter().map(|&g| g as u32).collect();
    let spec = build_relay(c, &k, &r, params.d, &spec_gamma)?;
    let code = assemble_relay(&field, &k, &r, &plan)?;

    let mut scramble_budget = BTreeMap::new();
    for j in 1..c {
        let limit = match mode {
            RelayMode::FullRandom => None,
            _ => Some(effective_gamma[j] as usize * plan.n),
        };
        scramble_budget.insert(j + 1, limit);
    }
    let trace = relay_trace(params, &effective_gamma, &plan);
    let built = BuiltCode {
        construction: format!("relay/{mode}"),
        scramble_usage: scramble_usage(&code),
        spec,
        code,
        q,
        extension: t,
        rates: vec![ratio(plan.m, plan.n)],
        target: target_name.into(),
        target_value: target,
        scramble_budget,
        trace,
    };
    built.audit_scrambles()?;
    Ok(built)
}

fn assemble_relay(field: &Field, k: &[usize], r: &[usize], plan: &RelayPlan) -> Result<NetworkCode, CodegenError> {
    let c = k.len();
    let (n, m) = (plan.n, plan.m);
    let hops: Vec<HopCoder> = (0..c).map(|j| HopCoder::new(field, k[j], r[j])).collect::<Result<_, _>>()?;
    let mut nodes = Vec::with_capacity(c);
    for j in 0..c {
        let fresh = plan.fresh[j];
        // Local inputs: [message | fresh] at the source, [fresh | in-edges] elsewhere.
        let (message, received, width) = if j == 0 {
            ((0..m).map(unit).collect::<Vec<_>>(), Vec::new(), m + fresh)
        } else {
            let got = hops[j - 1].decode(field, |i, s| fresh + i * n + s, m + plan.forward[j - 1]);
            let (msg, rest) = got.split_at(m);
            (msg.to_vec(), rest.to_vec(), fresh + k[j - 1] * n)
        };
        let fresh_base = if j == 0 { m } else { 0 };
        let mut pool = received;
        pool.extend((0..fresh).map(|i| unit(fresh_base + i)));
        let pad_count = r[j] * plan.used[j];
        if pool.len() != pad_count + plan.forward[j] {
            return Err(CodegenError::VerificationFailed(format!("hop {}: randomness pool mismatch", j + 1)));
        }
        let (pads, forward) = pool.split_at(pad_count);
        let mut payload = message;
        payload.extend_from_slice(forward);
        let word = hops[j].encode(field, &payload, pads, plan.used[j], n);
        let rows: Vec<Form> = word.into_iter().flatten().collect();
        nodes.push(NodeCode { node: j + 1, scrambles: fresh, map: LocalMap::Linear(forms_to_matrix(field, &rows, width)) });
    }
    let dec = hops[c - 1].decode(field, |i, s| i * n + s, m);
    let decoder = DecoderCode { node: c + 1, messages: vec![0], map: LocalMap::Linear(forms_to_matrix(field, &dec, k[c - 1] * n)) };
    Ok(NetworkCode {
        n,
        field: field.clone(),
        messages: vec![MessageSpec { source: 1, terminal: c + 1, symbols: m }],
        nodes,
        decoders: vec![decoder],
    })
}

// ---------------------------------------------------------------------------
// Single-source multicast

/// Multicast code without intermediate randomness. The source precomputes
/// every layer's codewords: each terminal's message is padded across the
/// edges into it, the symbols a relay must forward become that relay's
/// payload one layer up, and so on down to the source. Relays decode and
/// forward. `rates` defaults to the equal split on the sum boundary.
pub fn multicast_code(params: &MulticastParams, rates: Option<&[Rational]>) -> Result<BuiltCode, CodegenError> {
    if params.a != 1 {
        return Err(CodegenError::BadParams("multicast codes have one source".into()));
    }
    if params.c > 3 {
        return Err(CodegenError::BadParams(format!("multicast codes are built for c <= 3, got {}", params.c)));
    }
    let region = multicast_region(params, Randomness::None)?;
    let a1 = region.constant("A1").expect("A1").clone();
    let a2 = region.constant("A2").expect("A2").clone();
    let b = params.b as usize;
    let rates: Vec<Rational> = match rates {
        Some(r) if r.len() != b => {
            return Err(CodegenError::BadParams(format!("need {b} rates, got {}", r.len())))
        }
        Some(r) => r.to_vec(),
        None => {
            let share = &a1 / Rational::from_integer(BigInt::from(b));
            vec![if share < a2 { share } else { a2.clone() }; b]
        }
    };
    if rates.iter().any(|r| r.is_negative()) {
        return Err(CodegenError::BadParams("rates must be non-negative".into()));
    }
    let (inside, violated) = region_contains(&region, &rates)?;
    if !inside {
        return Err(CodegenError::RegionViolation(violated.unwrap_or_default()));
    }

    let c = params.c;
    let sizes: Vec<usize> = params.layer_sizes().iter().map(|&x| x as usize).collect();
    let k: Vec<usize> = params.k.iter().map(|&x| x as usize).collect();
    let r: Vec<usize> = params.r.iter().map(|&x| x as usize).collect();
    if let Some(j) = (0..c).find(|&j| sizes[j] * k[j] <= r[j]) {
        return Err(CodegenError::BadParams(format!("layer {}: every incoming edge is tapped", j + 1)));
    }
    let q = usable_prime_power(params.d)?;
    let t = (0..c).fold(1u32, |acc, j| acc.lcm(&degree_needed(q, sizes[j] * k[j], r[j])));
    let field = code_field(q, t)?;
    let spec = build_multicast(1, b, c, &sizes[1..c], &k, &r, params.d)?;
    let hops: Vec<HopCoder> =
        (0..c).map(|j| HopCoder::new(&field, sizes[j] * k[j], r[j])).collect::<Result<_, _>>()?;

    let den = rates.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let den = den.to_usize().filter(|&d| d <= MAX_BLOCK).ok_or_else(|| {
        CodegenError::ScaleExceeded(format!("rates need a block beyond {MAX_BLOCK}"))
    })?;
    let (n, letters) = (1..)
        .map(|mult| mult * den)
        .take_while(|&n| n <= MAX_BLOCK)
        .find_map(|n| {
            let letters: Vec<usize> =
                rates.iter().map(|x| usize_of(&(x * Rational::from_integer(BigInt::from(n))))).collect::<Option<_>>()?;
            multicast_fits(&spec, &hops, &letters, n).then_some((n, letters))
        })
        .ok_or_else(|| CodegenError::ScaleExceeded(format!("no block length up to {MAX_BLOCK} fits the rates")))?;

    let code = assemble_multicast(&spec, &field, &hops, &letters, n)?;
    let trace = (1..=c)
        .map(|layer| TraceStep {
            layer,
            case: TraceCase::Base,
            note: format!("{} of {} edges into each node tapped", r[layer - 1], sizes[layer - 1] * k[layer - 1]),
        })
        .collect();
    Ok(BuiltCode {
        construction: "multicast".into(),
        scramble_usage: scramble_usage(&code),
        spec: spec.clone(),
        code,
        q,
        extension: t,
        rates: letters.iter().map(|&l| ratio(l, n)).collect(),
        target: "A1".into(),
        target_value: a1,
        scramble_budget: spec.nodes.iter().enumerate().skip(1).map(|(i, _)| (i + 1, Some(0))).collect(),
        trace,
    })
}

/// Payload letters every node must receive, given each terminal's letters.
/// Returns `None` when some node needs more than `n` positions.
fn multicast_loads(spec: &NetworkSpec, hops: &[HopCoder], letters: &[usize], n: usize) -> Option<BTreeMap<usize, usize>> {
    let mut load: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &t) in spec.terminals().iter().enumerate() {
        load.insert(t, letters[i]);
    }
    let mut node = spec.node_count();
    while node > 1 {
        let layer = spec.nodes[node - 1];
        let used = hops[layer - 1].positions_for(load[&node]);
        if used > n {
            return None;
        }
        for e in spec.in_edges(node) {
            *load.entry(spec.edge(e).from).or_insert(0) += used;
        }
        node -= 1;
    }
    Some(load)
}

fn multicast_fits(spec: &NetworkSpec, hops: &[HopCoder], letters: &[usize], n: usize) -> bool {
    multicast_loads(spec, hops, letters, n).is_some()
}

fn assemble_multicast(
    spec: &NetworkSpec,
    field: &Field,
    hops: &[HopCoder],
    letters: &[usize],
    n: usize,
) -> Result<NetworkCode, CodegenError> {
    let v = spec.node_count();
    let terminals = spec.terminals();
    let load = multicast_loads(spec, hops, letters, n).expect("plan was checked");
    let used = |node: usize| hops[spec.nodes[node - 1] - 1].positions_for(load[&node]);

    // Source-level forms: messages first, then pads as they are allocated.
    let total_letters: usize = letters.iter().sum();
    let mut next_var = total_letters;
    let mut payload: BTreeMap<usize, Vec<Form>> = BTreeMap::new();
    let mut offset = 0;
    for (i, &t) in terminals.iter().enumerate() {
        payload.insert(t, (offset..offset + letters[i]).map(unit).collect());
        offset += letters[i];
    }
    let mut edge_forms: BTreeMap<usize, Vec<Form>> = BTreeMap::new();
    let layer_of = |node: usize| spec.nodes[node - 1];
    for layer in (1..=spec.c).rev() {
        for node in (2..=v).filter(|&x| layer_of(x) == layer) {
            let hop = &hops[layer - 1];
            let u = used(node);
            let pads: Vec<Form> = (0..hop.r * u).map(|i| unit(next_var + i)).collect();
            next_var += hop.r * u;
            let word = hop.encode(field, &payload[&node], &pads, u, n);
            for (e, forms) in spec.in_edges(node).into_iter().zip(word) {
                edge_forms.insert(e, forms);
            }
        }
        // Senders of this layer now know what they must forward.
        for sender in (2..=v).filter(|&x| layer_of(x) + 1 == layer) {
            let mut mine = Vec::new();
            for e in spec.out_edges(sender) {
                mine.extend(edge_forms[&e][..used(spec.edge(e).to)].iter().cloned());
            }
            payload.insert(sender, mine);
        }
    }

    let mut nodes = Vec::new();
    let width = next_var;
    let rows: Vec<Form> = spec.out_edges(1).into_iter().flat_map(|e| edge_forms[&e].clone()).collect();
    nodes.push(NodeCode {
        node: 1,
        scrambles: width - total_letters,
        map: LocalMap::Linear(forms_to_matrix(field, &rows, width)),
    });
    for node in 2..=v {
        let outs = spec.out_edges(node);
        if outs.is_empty() {
            continue;
        }
        let hop = &hops[spec.nodes[node - 1] - 1];
        let ins = spec.in_edges(node).len();
        let got = hop.decode(field, |i, s| i * n + s, load[&node]);
        let mut rows = Vec::new();
        let mut idx = 0;
        for e in outs {
            let u = used(spec.edge(e).to);
            for s in 0..n {
                if s < u {
                    rows.push(got[idx].clone());
                    idx += 1;
                } else {
                    rows.push(Form::new());
                }
            }
        }
        nodes.push(NodeCode { node, scrambles: 0, map: LocalMap::Linear(forms_to_matrix(field, &rows, ins * n)) });
    }
    let mut decoders = Vec::new();
    let mut messages = Vec::new();
    for (i, &t) in terminals.iter().enumerate() {
        messages.push(MessageSpec { source: 1, terminal: t, symbols: letters[i] });
        let hop = &hops[spec.nodes[t - 1] - 1];
        let ins = spec.in_edges(t).len();
        let dec = hop.decode(field, |e, s| e * n + s, letters[i]);
        decoders.push(DecoderCode { node: t, messages: vec![i], map: LocalMap::Linear(forms_to_matrix(field, &dec, ins * n)) });
    }
    Ok(NetworkCode { n, field: field.clone(), messages, nodes, decoders })
}

// ---------------------------------------------------------------------------
// Verification

/// Exhaustive secrecy check of a code against A0, A2 and A3.
#[derive(Clone, Debug, Serialize)]
pub struct CodeVerification {
    pub worlds: u64,
    pub decodable: bool,
    pub a0: Verdict,
    pub a0_max_bits: f64,
    pub a2: Verdict,
    pub a2_bits: f64,
    pub a3: Verdict,
    pub a3_bits: f64,
    pub active_sweep: Option<SweepSummary>,
}

impl CodeVerification {
    pub fn perfectly_secure(&self) -> bool {
        self.decodable && [self.a0, self.a2, self.a3].iter().all(|&v| v == Verdict::PerfectlySecure)
    }
}

pub fn verify_code(spec: &NetworkSpec, code: &NetworkCode) -> Result<CodeVerification, CodegenError> {
    let table = WorldTable::enumerate(spec, code)?;
    let a0 = classify_with_table(spec, code, &table, AttackClass::A0)?;
    let a2 = classify_with_table(spec, code, &table, AttackClass::A2)?;
    let a3 = classify_with_table(spec, code, &table, AttackClass::A3)?;
    Ok(CodeVerification {
        worlds: table.worlds as u64,
        decodable: table.decodable(),
        a0: a0.verdict,
        a0_max_bits: a0.max_leakage_bits,
        a2: a2.verdict,
        a2_bits: a2.max_leakage_bits,
        a3: a3.verdict,
        a3_bits: a3.max_leakage_bits,
        active_sweep: a3.active_sweep,
    })
}

// ---------------------------------------------------------------------------
// Scalar linear relay codes

/// Outcome of the exhaustive scalar-linear search.
#[derive(Clone, Debug)]
pub struct ScalarSearch {
    pub q_prime: u64,
    /// `max(k_1 - sum r_j, 0)`.
    pub bound: usize,
    pub max_secure_symbols: usize,
    /// Encoder assignments examined per message length tried.
    pub examined: Vec<(usize, u64)>,
    pub witness: Option<(NetworkSpec, NetworkCode)>,
}

impl ScalarSearch {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema_version": 1,
            "q_prime": self.q_prime,
            "bound": self.bound,
            "max_secure_symbols": self.max_secure_symbols,
            "examined": self.examined.iter().map(|(s, n)| json!({"symbols": s, "codes": n})).collect::<Vec<_>>(),
            "witness": self.witness.as_ref().map(|(_, c)| c.to_json()),
        })
    }
}

/// Counts of decodable scalar linear codes by deterministic-attack verdict.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LinearCensus {
    pub codes: u64,
    pub decodable: u64,
    pub perfectly_secure: u64,
    pub imperfectly_secure: u64,
    pub insecure: u64,
}

/// The relay with one field symbol per edge, the source holding `s`
/// message symbols and `k_1` scrambles, intermediate nodes none.
struct ScalarSpace {
    field: Field,
    spec: NetworkSpec,
    k: Vec<usize>,
    s: usize,
    /// Edge id to (hop, index within hop).
    family: Vec<Vec<(usize, usize)>>,
}

impl ScalarSpace {
    fn new(params: &RelayParams, q_prime: u64, s: usize) -> Result<ScalarSpace, CodegenError> {
        params.validate()?;
        let (p, m) = base_field(q_prime)?;
        let field = field_make(p, m)?;
        let k: Vec<usize> = params.k.iter().map(|&x| x as usize).collect();
        let r: Vec<usize> = params.r.iter().map(|&x| x as usize).collect();
        let spec = build_relay(params.c, &k, &r, q_prime, &[])?;
        let mut locate = vec![(0, 0); spec.edge_count() + 1];
        let mut id = 1;
        for (hop, &kk) in k.iter().enumerate() {
            for i in 0..kk {
                locate[id] = (hop, i);
                id += 1;
            }
        }
        let family = spec
            .attack_family()?
            .into_iter()
            .map(|set| set.into_iter().map(|e| locate[e]).collect())
            .collect();
        Ok(ScalarSpace { field, spec, k, s, family })
    }

    fn inputs(&self) -> usize {
        self.s + self.k[0]
    }

    /// Entries of the source and relay matrices.
    fn encoder_entries(&self) -> usize {
        self.k[0] * self.inputs() + self.k.windows(2).map(|w| w[0] * w[1]).sum::<usize>()
    }

    fn total_entries(&self) -> usize {
        self.encoder_entries() + self.s * self.k[self.k.len() - 1]
    }

    fn guard(&self) -> Result<u64, CodegenError> {
        let q = self.field.q() as f64;
        let total = q.powi(self.total_entries() as i32);
        if total > (1u64 << 24) as f64 {
            return Err(CodegenError::TooLarge(format!(
                "{}^{} scalar codes with {} message symbols exceed 2^24",
                self.field.q(),
                self.total_entries(),
                self.s
            )));
        }
        Ok((self.field.q() as u64).pow(self.encoder_entries() as u32))
    }

    /// Global edge forms per hop for the encoder given by `entries`.
    fn hops(&self, entries: &[u32]) -> Vec<Vec<Vec<u32>>> {
        let f = &self.field;
        let width = self.inputs();
        let mut at = 0;
        let mut out: Vec<Vec<Vec<u32>>> = Vec::with_capacity(self.k.len());
        out.push((0..self.k[0]).map(|_| {
            let row = entries[at..at + width].to_vec();
            at += width;
            row
        }).collect());
        for j in 1..self.k.len() {
            let prev = &out[j - 1];
            let mut hop = Vec::with_capacity(self.k[j]);
            for _ in 0..self.k[j] {
                let mut row = vec![0u32; width];
                for (t, src) in prev.iter().enumerate() {
                    let c = entries[at + t];
                    if c != 0 {
                        for (x, &y) in row.iter_mut().zip(src) {
                            *x = f.add(*x, f.mul(c, y));
                        }
                    }
                }
                at += prev.len();
                hop.push(row);
            }
            out.push(hop);
        }
        out
    }

    /// Decoder rows solving `D * G_last = [I | 0]`, if any.
    fn decoder(&self, hops: &[Vec<Vec<u32>>]) -> Option<FieldMatrix> {
        let last = FieldMatrix::from_rows(&self.field, &hops[hops.len() - 1]).ok()?.transpose();
        let mut rows = Vec::with_capacity(self.s);
        for i in 0..self.s {
            let target: Vec<u32> = (0..self.inputs()).map(|c| u32::from(c == i)).collect();
            rows.push(last.solve(&target).ok()?);
        }
        FieldMatrix::from_rows(&self.field, &rows).ok()
    }

    /// Message symbols a tapped set learns: `rank[A | B] - rank[B]`.
    fn leakage(&self, hops: &[Vec<Vec<u32>>], set: &[(usize, usize)]) -> usize {
        let rows: Vec<Vec<u32>> = set.iter().map(|&(h, i)| hops[h][i].clone()).collect();
        let all = FieldMatrix::from_rows(&self.field, &rows).expect("rows").rank();
        let pads: Vec<Vec<u32>> = rows.iter().map(|r| r[self.s..].to_vec()).collect();
        let noise = FieldMatrix::from_rows(&self.field, &pads).expect("rows").rank();
        all - noise
    }

    fn max_leakage(&self, hops: &[Vec<Vec<u32>>]) -> usize {
        self.family.iter().map(|set| self.leakage(hops, set)).max().unwrap_or(0)
    }

    fn for_each<F>(&self, mut visit: F) -> Result<u64, CodegenError>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        let count = self.guard()?;
        let q = self.field.q();
        let mut entries = vec![0u32; self.encoder_entries()];
        let mut seen = 0;
        loop {
            seen += 1;
            if visit(&entries).is_break() {
                return Ok(seen);
            }
            let mut i = 0;
            loop {
                if i == entries.len() {
                    debug_assert_eq!(seen, count);
                    return Ok(seen);
                }
                entries[i] += 1;
                if entries[i] < q {
                    break;
                }
                entries[i] = 0;
                i += 1;
            }
        }
    }

    fn to_code(&self, entries: &[u32], decoder: FieldMatrix) -> NetworkCode {
        let f = &self.field;
        let width = self.inputs();
        let mut at = 0;
        let mut take = |rows: usize, cols: usize| {
            let m = FieldMatrix { field: f.clone(), rows, cols, entries: entries[at..at + rows * cols].to_vec() };
            at += rows * cols;
            m
        };
        let mut nodes = vec![NodeCode { node: 1, scrambles: self.k[0], map: LocalMap::Linear(take(self.k[0], width)) }];
        for j in 1..self.k.len() {
            nodes.push(NodeCode { node: j + 1, scrambles: 0, map: LocalMap::Linear(take(self.k[j], self.k[j - 1])) });
        }
        let c = self.k.len();
        NetworkCode {
            n: 1,
            field: f.clone(),
            messages: vec![MessageSpec { source: 1, terminal: c + 1, symbols: self.s }],
            nodes,
            decoders: vec![DecoderCode { node: c + 1, messages: vec![0], map: LocalMap::Linear(decoder) }],
        }
    }
}

/// Largest number of message symbols some scalar linear code without
/// intermediate randomness carries with perfect deterministic secrecy
/// (linear codes need no stronger attack class), by exhaustive search.
pub fn scalar_linear_search(params: &RelayParams, q_prime: u64) -> Result<ScalarSearch, CodegenError> {
    params.validate()?;
    let tapped: u64 = params.r.iter().sum();
    let bound = params.k[0].saturating_sub(tapped) as usize;
    let most = *params.k.iter().min().expect("c >= 1") as usize;
    let mut result = ScalarSearch { q_prime, bound, max_secure_symbols: 0, examined: Vec::new(), witness: None };
    for s in 1..=most {
        let space = ScalarSpace::new(params, q_prime, s)?;
        let mut found = None;
        let seen = space.for_each(|entries| {
            let hops = space.hops(entries);
            match space.decoder(&hops) {
                Some(d) if space.max_leakage(&hops) == 0 => {
                    found = Some(space.to_code(entries, d));
                    ControlFlow::Break(())
                }
                _ => ControlFlow::Continue(()),
            }
        })?;
        result.examined.push((s, seen));
        match found {
            Some(code) => {
                result.max_secure_symbols = s;
                result.witness = Some((space.spec.clone(), code));
            }
            None => break,
        }
    }
    Ok(result)
}

/// Sorts every scalar linear relay code carrying `s` symbols by its worst
/// deterministic-attack leakage.
pub fn linear_code_census(params: &RelayParams, q_prime: u64, s: usize) -> Result<LinearCensus, CodegenError> {
    if s == 0 {
        return Err(CodegenError::BadParams("census needs at least one message symbol".into()));
    }
    let space = ScalarSpace::new(params, q_prime, s)?;
    let mut census = LinearCensus::default();
    census.codes = space.for_each(|entries| {
        let hops = space.hops(entries);
        if space.decoder(&hops).is_some() {
            census.decodable += 1;
            match space.max_leakage(&hops) {
                0 => census.perfectly_secure += 1,
                l if l == s => census.insecure += 1,
                _ => census.imperfectly_secure += 1,
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(census)
}

/// The network a scalar search or census runs on.
pub fn scalar_network(params: &RelayParams, q_prime: u64) -> Result<NetworkSpec, CodegenError> {
    Ok(ScalarSpace::new(params, q_prime, 1)?.spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::relay_capacity;

    fn rp(k: &[u64], r: &[u64], d: u64, gamma: &[u64]) -> RelayParams {
        RelayParams::new(k, r, d, gamma).unwrap()
    }

    #[test]
    fn wiretap_small_cases() {
        let v = wiretap2_vectors(3, 2, 2).unwrap();
        assert_eq!(v.vectors, vec![vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(v.n_factor, 1);
        let v = wiretap2_vectors(3, 1, 4).unwrap();
        assert!(v.vectors[0].iter().all(|&x| x != 0));
        let v = wiretap2_vectors(3, 3, 2).unwrap();
        assert!(v.matrix().is_invertible());
        let v = wiretap2_vectors(6, 3, 2).unwrap();
        assert_eq!(v.n_factor, 3);
        assert_eq!(v.verify().unwrap(), 6 * 5 * 4);
        assert!(wiretap2_vectors(2, 3, 2).is_err());
        assert!(wiretap2_vectors(3, 1, 6).is_err());
    }

    #[test]
    fn onehop_is_one_time_pad() {
        let b = onehop_code(2, 1, 2, 1).unwrap();
        let LocalMap::Linear(m) = &b.code.nodes[0].map else { panic!("linear") };
        // Inputs (M, L): Y1 = L, Y2 = M + L.
        assert_eq!(m.to_rows(), vec![vec![0, 1], vec![1, 1]]);
        let v = verify_code(&b.spec, &b.code).unwrap();
        assert!(v.perfectly_secure());
    }

    #[test]
    fn relay_block_lengths() {
        let p = rp(&[2, 2], &[1, 1], 2, &[0, 0]);
        let b = relay_code(&p, RelayMode::NoRandom).unwrap();
        assert_eq!((b.code.n, b.code.message_symbols()), (2, 1));
        assert!(b.code.intermediate_scrambles(&b.spec).is_empty());
        let b = relay_code(&p, RelayMode::FullRandom).unwrap();
        assert_eq!((b.code.n, b.code.message_symbols()), (1, 1));
        let p = rp(&[2, 2], &[1, 1], 2, &[0, 1]);
        let b = relay_code(&p, RelayMode::Limited).unwrap();
        assert_eq!(b.total_rate(), Rational::one());
        assert_eq!(b.trace[1].case, TraceCase::Case1);
        let p = rp(&[2, 3], &[1, 1], 3, &[0, 0]);
        let b = relay_code(&p, RelayMode::NoRandom).unwrap();
        assert_eq!((b.code.n, b.code.message_symbols()), (3, 2));
        assert_eq!(b.total_rate(), relay_capacity(&p).unwrap().c2);
    }

    #[test]
    fn relay_codes_are_secure() {
        for (k, r, g) in [([2u64, 2], [1u64, 1], [0u64, 0]), ([3, 2], [1, 1], [0, 1]), ([2, 3], [1, 0], [0, 1])] {
            let p = rp(&k, &r, 2, &g);
            for mode in [RelayMode::FullRandom, RelayMode::NoRandom, RelayMode::Limited] {
                let b = relay_code(&p, mode).unwrap();
                let v = verify_code(&b.spec, &b.code).unwrap();
                assert!(v.perfectly_secure(), "{k:?} {r:?} {g:?} {mode}: {v:?}");
            }
        }
    }

    #[test]
    fn multicast_example() {
        let p = MulticastParams::new(1, 2, &[1], &[2, 2], &[1, 1], 2).unwrap();
        let b = multicast_code(&p, None).unwrap();
        let quarter = ratio(1, 4);
        assert_eq!(b.rates, vec![quarter.clone(), quarter]);
        let v = verify_code(&b.spec, &b.code).unwrap();
        assert!(v.perfectly_secure(), "{v:?}");
        let too_much = vec![ratio(1, 2), ratio(1, 4)];
        assert!(matches!(multicast_code(&p, Some(&too_much)), Err(CodegenError::RegionViolation(_))));
    }

    #[test]
    fn scalar_search_examples() {
        let s = scalar_linear_search(&rp(&[2, 2], &[1, 1], 2, &[]), 2).unwrap();
        assert_eq!((s.max_secure_symbols, s.bound), (0, 0));
        let s = scalar_linear_search(&rp(&[2], &[1], 2, &[]), 2).unwrap();
        assert_eq!(s.max_secure_symbols, 1);
        let (spec, code) = s.witness.unwrap();
        assert!(verify_code(&spec, &code).unwrap().perfectly_secure());
        let s = scalar_linear_search(&rp(&[2], &[0], 2, &[]), 2).unwrap();
        assert_eq!(s.max_secure_symbols, 2);
    }
}
