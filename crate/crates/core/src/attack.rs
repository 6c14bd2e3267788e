//! Eavesdropping strategies: deterministic tap sets, adaptive decision
//! trees (time-ordered or general) and adaptive trees that also overwrite
//! what they read.
//!
//! Observed and replacement values are packed edge values: the `n` symbols
//! of an edge as base-`q` digits, least significant first.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{Execution, NetError, NetworkCode, NetworkSpec, Program, Scratch};
use crate::secrecy::{
    check_sizes, n_log_n, pack, scaled_entropy, unpack, JointCounts, JointDist, LogSum, SecrecyError,
    WorldTable,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("branch {0:?} is not an admissible tap set")]
    InvalidBranchSet(Vec<usize>),
    #[error("edge {0} is tapped twice on one branch")]
    RepeatedEdge(usize),
    #[error("branch {0:?} does not tap edges in increasing order")]
    OrderViolation(Vec<usize>),
    #[error("malformed strategy: {0}")]
    Malformed(String),
    #[error("no branch for value {value} observed on edge {edge}")]
    UncoveredValue { edge: usize, value: u32 },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Secrecy(SecrecyError),
    #[error(transparent)]
    Net(#[from] NetError),
}

impl From<SecrecyError> for AttackError {
    fn from(e: SecrecyError) -> Self {
        match e {
            SecrecyError::TooLarge(msg) => AttackError::TooLarge(msg),
            SecrecyError::Net(inner) => AttackError::Net(inner),
            other => AttackError::Secrecy(other),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackClass {
    A0,
    A1,
    A2,
    A3,
}

impl FromStr for AttackClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A0" => Ok(AttackClass::A0),
            "A1" => Ok(AttackClass::A1),
            "A2" => Ok(AttackClass::A2),
            "A3" => Ok(AttackClass::A3),
            _ => Err(format!("unknown attack class `{s}` (expected A0..A3)")),
        }
    }
}

impl fmt::Display for AttackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One decision point: tap `edge`, then continue with the subtree for the
/// observed value (or `otherwise`). `replace` maps an observed value to the
/// value forwarded downstream; absent entries forward unchanged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub edge: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", with = "keyed_by_value")]
    pub children: BTreeMap<u32, TreeNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub otherwise: Option<Box<TreeNode>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", with = "keyed_by_value")]
    pub replace: BTreeMap<u32, u32>,
}

/// JSON object keys are strings; tagged enums buffer their content, which
/// loses serde_json's automatic integer-key parsing, so convert explicitly.
mod keyed_by_value {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize, S: Serializer>(map: &BTreeMap<u32, T>, s: S) -> Result<S::Ok, S::Error> {
        let keyed: BTreeMap<String, &T> = map.iter().map(|(k, v)| (k.to_string(), v)).collect();
        keyed.serialize(s)
    }

    pub fn deserialize<'de, T: Deserialize<'de>, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, T>, D::Error> {
        let keyed = BTreeMap::<String, T>::deserialize(d)?;
        keyed
            .into_iter()
            .map(|(k, v)| k.parse().map(|k| (k, v)).map_err(|_| D::Error::custom(format!("bad edge value `{k}`"))))
            .collect()
    }
}

impl TreeNode {
    pub fn leaf(edge: usize) -> TreeNode {
        TreeNode { edge, children: BTreeMap::new(), otherwise: None, replace: BTreeMap::new() }
    }

    pub fn with_children<I: IntoIterator<Item = (u32, TreeNode)>>(edge: usize, children: I) -> TreeNode {
        TreeNode { children: children.into_iter().collect(), ..TreeNode::leaf(edge) }
    }

    pub fn next(&self, value: u32) -> Option<&TreeNode> {
        self.children.get(&value).or(self.otherwise.as_deref())
    }

    fn is_leaf(&self) -> bool {
        self.children.is_empty() && self.otherwise.is_none()
    }

    /// Same tree with every replacement removed.
    pub fn passive(&self) -> TreeNode {
        TreeNode {
            edge: self.edge,
            children: self.children.iter().map(|(&v, c)| (v, c.passive())).collect(),
            otherwise: self.otherwise.as_ref().map(|c| Box::new(c.passive())),
            replace: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackStrategy {
    Deterministic { edges: Vec<usize> },
    TimeOrdered { tree: Option<TreeNode> },
    GeneralAdaptive { tree: Option<TreeNode> },
    AdaptiveActive { tree: Option<TreeNode> },
}

impl AttackStrategy {
    pub fn tree(&self) -> Option<&TreeNode> {
        match self {
            AttackStrategy::Deterministic { .. } => None,
            AttackStrategy::TimeOrdered { tree }
            | AttackStrategy::GeneralAdaptive { tree }
            | AttackStrategy::AdaptiveActive { tree } => tree.as_ref(),
        }
    }

    pub fn is_active(&self) -> bool {
        matches!(self, AttackStrategy::AdaptiveActive { .. })
    }

    fn requires_order(&self) -> bool {
        matches!(self, AttackStrategy::TimeOrdered { .. } | AttackStrategy::AdaptiveActive { .. })
    }

    /// The same strategy with replacements dropped (still time-ordered).
    pub fn passive_counterpart(&self) -> AttackStrategy {
        match self {
            AttackStrategy::AdaptiveActive { tree } => {
                AttackStrategy::TimeOrdered { tree: tree.as_ref().map(TreeNode::passive) }
            }
            other => other.clone(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("strategy serializes")
    }

    pub fn from_json(text: &str) -> Result<AttackStrategy, AttackError> {
        serde_json::from_str(text).map_err(|e| AttackError::Malformed(e.to_string()))
    }
}

pub fn set_id(edges: &[usize]) -> String {
    let parts: Vec<String> = edges.iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Every admissible deterministic tap set, in lexicographic order.
pub fn enumerate_deterministic(spec: &NetworkSpec) -> Result<Vec<AttackStrategy>, AttackError> {
    Ok(spec.attack_family()?.into_iter().map(|edges| AttackStrategy::Deterministic { edges }).collect())
}

/// Validates a tree description against the network.
pub fn make_adaptive(spec: &NetworkSpec, strategy: AttackStrategy) -> Result<AttackStrategy, AttackError> {
    validate(spec, &strategy)?;
    Ok(strategy)
}

pub fn validate(spec: &NetworkSpec, strategy: &AttackStrategy) -> Result<(), AttackError> {
    let family: BTreeSet<Vec<usize>> = spec.attack_family()?.into_iter().collect();
    let zeta = spec.zeta();
    match strategy {
        AttackStrategy::Deterministic { edges } => {
            let mut sorted = edges.clone();
            sorted.sort_unstable();
            if let Some(e) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(AttackError::RepeatedEdge(e[0]));
            }
            if !family.contains(&sorted) {
                return Err(AttackError::InvalidBranchSet(sorted));
            }
            Ok(())
        }
        _ => match strategy.tree() {
            None if zeta == 0 => Ok(()),
            None => Err(AttackError::InvalidBranchSet(Vec::new())),
            Some(root) => {
                let mut path = Vec::new();
                check_node(spec, strategy, root, &family, zeta, &mut path)
            }
        },
    }
}

fn check_node(
    spec: &NetworkSpec,
    strategy: &AttackStrategy,
    node: &TreeNode,
    family: &BTreeSet<Vec<usize>>,
    zeta: usize,
    path: &mut Vec<usize>,
) -> Result<(), AttackError> {
    if node.edge == 0 || node.edge > spec.edge_count() {
        return Err(AttackError::Malformed(format!("edge {} does not exist", node.edge)));
    }
    if path.contains(&node.edge) {
        return Err(AttackError::RepeatedEdge(node.edge));
    }
    if !node.replace.is_empty() && !strategy.is_active() {
        return Err(AttackError::Malformed("only active strategies replace values".into()));
    }
    path.push(node.edge);
    if strategy.requires_order() && path.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AttackError::OrderViolation(path.clone()));
    }
    let result = if path.len() == zeta || node.is_leaf() {
        let mut set = path.clone();
        set.sort_unstable();
        if node.is_leaf() && family.contains(&set) {
            Ok(())
        } else {
            if !node.is_leaf() {
                // Deeper than the tap budget: report the first over-long branch.
                let extra = node.children.values().next().or(node.otherwise.as_deref()).map(|c| c.edge);
                set.extend(extra);
                set.sort_unstable();
            }
            Err(AttackError::InvalidBranchSet(set))
        }
    } else {
        node.children
            .values()
            .chain(node.otherwise.as_deref())
            .try_for_each(|c| check_node(spec, strategy, c, family, zeta, path))
    };
    path.pop();
    result
}

// ---------------------------------------------------------------------------
// Passive views

fn tree_view(table: &WorldTable, root: &TreeNode, w: usize) -> Result<Vec<u32>, AttackError> {
    let mut z = Vec::new();
    let mut node = Some(root);
    while let Some(nd) = node {
        let v = table.value(w, nd.edge);
        z.push(v);
        if nd.is_leaf() {
            break;
        }
        node = Some(nd.next(v).ok_or(AttackError::UncoveredValue { edge: nd.edge, value: v })?);
    }
    Ok(z)
}

/// Joint distribution of message and view for a passive strategy.
pub fn passive_distribution(table: &WorldTable, strategy: &AttackStrategy) -> Result<JointDist, AttackError> {
    if strategy.is_active() {
        return Err(AttackError::Malformed("active strategies need re-execution".into()));
    }
    match strategy {
        AttackStrategy::Deterministic { edges } => {
            let mut sorted = edges.clone();
            sorted.sort_unstable();
            Ok(table.view(&sorted))
        }
        _ => match strategy.tree() {
            None => Ok(table.view(&[])),
            Some(root) => {
                let pairs = (0..table.worlds)
                    .map(|w| Ok((table.message[w], tree_view(table, root, w)?)))
                    .collect::<Result<Vec<_>, AttackError>>()?;
                Ok(JointDist::from_pairs(table.message_count as u64, pairs))
            }
        },
    }
}

// ---------------------------------------------------------------------------
// Active execution

/// What Eve saw (before replacing) and what she forwarded, per tapped edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EveView {
    pub observed: Vec<(usize, Vec<u32>)>,
    pub forwarded: Vec<(usize, Vec<u32>)>,
}

struct ActiveWalker<'t> {
    node: Option<&'t TreeNode>,
    z: Vec<u32>,
    forwarded: Vec<u32>,
    edges: Vec<usize>,
    error: Option<AttackError>,
}

impl<'t> ActiveWalker<'t> {
    fn new(root: Option<&'t TreeNode>) -> Self {
        ActiveWalker { node: root, z: Vec::new(), forwarded: Vec::new(), edges: Vec::new(), error: None }
    }

    fn reset(&mut self, root: Option<&'t TreeNode>) {
        self.node = root;
        self.z.clear();
        self.forwarded.clear();
        self.edges.clear();
        self.error = None;
    }

    #[inline]
    fn on_edge(&mut self, e: usize, vals: &mut [u32], q: u32) {
        let Some(nd) = self.node else { return };
        if nd.edge != e {
            return;
        }
        let v = pack(vals, q);
        self.z.push(v);
        self.edges.push(e);
        let out = nd.replace.get(&v).copied().unwrap_or(v);
        if out != v {
            vals.copy_from_slice(&unpack(out, q, vals.len()));
        }
        self.forwarded.push(out);
        self.node = if nd.is_leaf() {
            None
        } else {
            match nd.next(v) {
                Some(c) => Some(c),
                None => {
                    self.error = Some(AttackError::UncoveredValue { edge: e, value: v });
                    None
                }
            }
        };
    }
}

fn active_tree(spec: &NetworkSpec, strategy: &AttackStrategy) -> Result<Option<TreeNode>, AttackError> {
    match strategy {
        AttackStrategy::AdaptiveActive { tree } => {
            validate(spec, strategy)?;
            Ok(tree.clone())
        }
        AttackStrategy::TimeOrdered { .. } => {
            validate(spec, strategy)?;
            Ok(strategy.tree().cloned())
        }
        AttackStrategy::GeneralAdaptive { tree } => {
            let path_order_ok = tree.as_ref().is_none_or(increasing_everywhere);
            if !path_order_ok {
                return Err(AttackError::OrderViolation(first_unordered_path(tree.as_ref().unwrap())));
            }
            validate(spec, strategy)?;
            Ok(tree.clone())
        }
        AttackStrategy::Deterministic { .. } => {
            Err(AttackError::Malformed("deterministic sets have no active form".into()))
        }
    }
}

fn increasing_everywhere(node: &TreeNode) -> bool {
    node.children.values().chain(node.otherwise.as_deref()).all(|c| c.edge > node.edge && increasing_everywhere(c))
}

fn first_unordered_path(node: &TreeNode) -> Vec<usize> {
    for c in node.children.values().chain(node.otherwise.as_deref()) {
        if c.edge <= node.edge {
            return vec![node.edge, c.edge];
        }
        let mut rest = first_unordered_path(c);
        if !rest.is_empty() {
            rest.insert(0, node.edge);
            return rest;
        }
    }
    Vec::new()
}

/// Runs one world with Eve tapping and replacing as the tree dictates;
/// downstream nodes consume the replaced values.
pub fn apply_active(
    spec: &NetworkSpec,
    code: &NetworkCode,
    strategy: &AttackStrategy,
    messages: &[Vec<u32>],
    scrambles: &BTreeMap<usize, Vec<u32>>,
) -> Result<(Execution, EveView), AttackError> {
    if !strategy.is_active() {
        return Err(AttackError::Malformed("expected an adaptive_active strategy".into()));
    }
    let tree = active_tree(spec, strategy)?;
    let program = Program::new(spec, code)?;
    let mut buf = vec![0u32; program.buffer_len()];
    program.load_inputs(&mut buf, messages, scrambles)?;
    let q = code.field.q();
    let mut walker = ActiveWalker::new(tree.as_ref());
    let mut scratch = Scratch::default();
    let mut modifications = BTreeMap::new();
    program.run(&mut buf, &mut scratch, |e, vals| {
        let before = walker.forwarded.len();
        walker.on_edge(e, vals, q);
        if walker.forwarded.len() > before && walker.forwarded[before] != walker.z[before] {
            modifications.insert(e, vals.to_vec());
        }
    });
    if let Some(err) = walker.error {
        return Err(err);
    }
    let n = code.n;
    let edges: Vec<Vec<u32>> = (0..spec.edge_count())
        .map(|i| buf[program.edge_offset + i * n..program.edge_offset + (i + 1) * n].to_vec())
        .collect();
    let decoded = program.decode(&buf, &mut scratch);
    let view = EveView {
        observed: walker.edges.iter().zip(&walker.z).map(|(&e, &v)| (e, unpack(v, q, n))).collect(),
        forwarded: walker.edges.iter().zip(&walker.forwarded).map(|(&e, &v)| (e, unpack(v, q, n))).collect(),
    };
    Ok((Execution { edges, decoded, modifications }, view))
}

const CHUNK: usize = 1 << 12;

/// Joint distribution of message and Eve's (pre-replacement) view when the
/// network is re-executed under an active strategy.
pub fn active_distribution(
    spec: &NetworkSpec,
    code: &NetworkCode,
    strategy: &AttackStrategy,
) -> Result<JointDist, AttackError> {
    let tree = active_tree(spec, strategy)?;
    let program = Program::new(spec, code)?;
    let (worlds, _) = check_sizes(code)?;
    active_distribution_with(&program, tree.as_ref(), worlds as usize)
}

fn active_distribution_with(
    program: &Program<'_>,
    tree: Option<&TreeNode>,
    worlds: usize,
) -> Result<JointDist, AttackError> {
    let q = program.code.field.q() as usize;
    let message_count = q.pow(program.message_len as u32);
    let chunks: Vec<Result<JointDistPart, AttackError>> = (0..worlds.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(worlds);
            let mut buf = vec![0u32; program.buffer_len()];
            let mut scratch = Scratch::default();
            let mut walker = ActiveWalker::new(tree);
            let mut out = Vec::with_capacity(end - start);
            for w in start..end {
                let mut rest = w;
                for slot in buf.iter_mut().take(program.input_len) {
                    *slot = (rest % q) as u32;
                    rest /= q;
                }
                walker.reset(tree);
                program.run(&mut buf, &mut scratch, |e, vals| walker.on_edge(e, vals, q as u32));
                if let Some(err) = walker.error.take() {
                    return Err(err);
                }
                out.push(((w % message_count) as u32, walker.z.clone()));
            }
            Ok(out)
        })
        .collect();
    let mut counts = JointCounts::default();
    for c in chunks {
        for (m, z) in c? {
            counts.add(m, &z);
        }
    }
    Ok(counts.into_dist(message_count as u64))
}

type JointDistPart = Vec<(u32, Vec<u32>)>;

/// An active strategy evaluated against its passive reduction: in every
/// world, the clean (unmodified) values of the edges the active strategy
/// tapped. Those choices form a passive time-ordered strategy exactly when
/// Eve's active view and the clean view determine each other; the two joint
/// distributions then agree up to relabeling and leak the same amount.
struct ActiveEvaluation {
    active: JointDist,
    reduced: JointDist,
    bijective: bool,
}

fn evaluate_active(program: &Program<'_>, tree: Option<&TreeNode>, table: &WorldTable) -> Result<ActiveEvaluation, AttackError> {
    let q = table.q as usize;
    let mut buf = vec![0u32; program.buffer_len()];
    let mut scratch = Scratch::default();
    let mut walker = ActiveWalker::new(tree);
    let mut active = JointCounts::default();
    let mut reduced = JointCounts::default();
    // The views determine each other iff there are as many distinct
    // (active, clean) pairs as distinct views on either side.
    let mut pairs: HashSet<Vec<u32>> = HashSet::new();
    let mut clean = Vec::new();
    for w in 0..table.worlds {
        let mut rest = w;
        for slot in buf.iter_mut().take(program.input_len) {
            *slot = (rest % q) as u32;
            rest /= q;
        }
        walker.reset(tree);
        program.run(&mut buf, &mut scratch, |e, vals| walker.on_edge(e, vals, q as u32));
        if let Some(err) = walker.error.take() {
            return Err(err);
        }
        let m = table.message[w];
        clean.clear();
        clean.extend(walker.edges.iter().map(|&e| table.value(w, e)));
        clean.extend(walker.edges.iter().map(|&e| e as u32));
        active.add(m, &walker.z);
        reduced.add(m, &clean);
        clean.extend_from_slice(&walker.z);
        if !pairs.contains(clean.as_slice()) {
            pairs.insert(clean.clone());
        }
    }
    let message_count = table.message_count as u64;
    let (active, reduced) = (active.into_dist(message_count), reduced.into_dist(message_count));
    let bijective = active.cells.len() == pairs.len() && reduced.cells.len() == pairs.len();
    Ok(ActiveEvaluation { active, reduced, bijective })
}

// ---------------------------------------------------------------------------
// Optimal adaptive attacks

/// Maximum leakage over the class and a strategy attaining it (bits).
pub fn optimal_adaptive_leakage(
    spec: &NetworkSpec,
    code: &NetworkCode,
    class: AttackClass,
) -> Result<(f64, AttackStrategy), AttackError> {
    let table = WorldTable::enumerate(spec, code)?;
    let (strategy, dist) = optimal_with_table(spec, &table, class)?;
    Ok((dist.mutual_information(), strategy))
}

const MAX_DP_EDGES: usize = 64;

struct Dp<'a> {
    table: &'a WorldTable,
    family: Vec<u64>,
    zeta: usize,
    time_ordered: bool,
    extendable: HashMap<(u64, usize), bool>,
    memo: HashMap<Vec<(usize, u32)>, (f64, TreeNode)>,
}

impl Dp<'_> {
    /// Whether tapping `e` on top of `mask` still completes to a family
    /// member; time-ordered paths may only complete with later edges.
    fn can_extend(&mut self, mask: u64, e: usize) -> bool {
        let next = mask | 1 << (e - 1);
        let key = (next, if self.time_ordered { e } else { 0 });
        if let Some(&b) = self.extendable.get(&key) {
            return b;
        }
        let earlier = if e >= 64 { u64::MAX } else { (1u64 << e) - 1 };
        let b = self.family.iter().any(|&f| {
            f & next == next && (!self.time_ordered || f & !next & earlier == 0)
        });
        self.extendable.insert(key, b);
        b
    }

    fn leaf_value(&self, worlds: &[u32]) -> f64 {
        let mut counts: HashMap<u32, u64> = HashMap::new();
        for &w in worlds {
            *counts.entry(self.table.message[w as usize]).or_insert(0) += 1;
        }
        n_log_n(worlds.len() as u64) - counts.values().map(|&c| n_log_n(c)).sum::<f64>()
    }

    fn partition(&self, worlds: &[u32], edge: usize) -> BTreeMap<u32, Vec<u32>> {
        let mut parts: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &w in worlds {
            parts.entry(self.table.value(w as usize, edge)).or_default().push(w);
        }
        parts
    }

    /// Minimal `sum over leaves of |leaf| * H(M | leaf)` below this state.
    fn solve(&mut self, worlds: &[u32], obs: &mut Vec<(usize, u32)>) -> (f64, Option<TreeNode>) {
        if obs.len() == self.zeta {
            return (self.leaf_value(worlds), None);
        }
        let mut key = obs.clone();
        key.sort_unstable();
        if let Some((v, t)) = self.memo.get(&key) {
            return (*v, Some(t.clone()));
        }
        let mask: u64 = obs.iter().fold(0, |m, &(e, _)| m | 1 << (e - 1));
        let last = obs.last().map_or(0, |&(e, _)| e);
        let mut best: Option<(f64, TreeNode)> = None;
        for e in 1..=self.table.edge_count {
            if mask & (1 << (e - 1)) != 0 || (self.time_ordered && e <= last) {
                continue;
            }
            if !self.can_extend(mask, e) {
                continue;
            }
            let mut total = 0.0;
            let mut node = TreeNode::leaf(e);
            for (v, part) in self.partition(worlds, e) {
                obs.push((e, v));
                let (val, child) = self.solve(&part, obs);
                obs.pop();
                total += val;
                if let Some(c) = child {
                    node.children.insert(v, c);
                }
            }
            best = match best {
                None => Some((total, node)),
                Some((bv, bt)) => {
                    let tol = 1e-9 * bv.abs().max(total.abs()).max(1.0);
                    let better = if (total - bv).abs() <= tol {
                        let exact_new = self.exact_value(worlds, &node);
                        let exact_old = self.exact_value(worlds, &bt);
                        exact_new.cmp_exact(&exact_old) == Ordering::Less
                    } else {
                        total < bv
                    };
                    if better {
                        Some((total, node))
                    } else {
                        Some((bv, bt))
                    }
                }
            };
        }
        let (v, t) = best.expect("an admissible edge exists below the tap budget");
        self.memo.insert(key, (v, t.clone()));
        (v, Some(t))
    }

    /// Exact counterpart of the value of `node` on `worlds`.
    fn exact_value(&self, worlds: &[u32], node: &TreeNode) -> LogSum {
        let mut total = LogSum::zero();
        for (v, part) in self.partition(worlds, node.edge) {
            match node.children.get(&v) {
                Some(child) => total.add(&self.exact_value(&part, child)),
                None => {
                    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
                    for &w in &part {
                        *counts.entry(self.table.message[w as usize]).or_insert(0) += 1;
                    }
                    total.add(&scaled_entropy(counts.into_values()));
                }
            }
        }
        total
    }
}

/// Optimal strategy for the class on a precomputed world table, with its
/// joint distribution. Ties go to the lexicographically least edge (A1, A2)
/// or tap set (A0).
pub fn optimal_with_table(
    spec: &NetworkSpec,
    table: &WorldTable,
    class: AttackClass,
) -> Result<(AttackStrategy, JointDist), AttackError> {
    let family = spec.attack_family()?;
    match class {
        AttackClass::A0 => {
            let mut best: Option<(Vec<usize>, JointDist, LogSum)> = None;
            for s in family {
                let dist = table.view(&s);
                let leak = dist.scaled_leakage();
                let better = match &best {
                    None => true,
                    Some((_, _, b)) => leak.cmp_exact(b) == Ordering::Greater,
                };
                if better {
                    best = Some((s, dist, leak));
                }
            }
            let (edges, dist, _) = best.expect("tap family is never empty");
            Ok((AttackStrategy::Deterministic { edges }, dist))
        }
        AttackClass::A1 | AttackClass::A2 | AttackClass::A3 => {
            let time_ordered = class != AttackClass::A2;
            let wrap = |tree| {
                if time_ordered {
                    AttackStrategy::TimeOrdered { tree }
                } else {
                    AttackStrategy::GeneralAdaptive { tree }
                }
            };
            let zeta = spec.zeta();
            if zeta == 0 {
                return Ok((wrap(None), table.view(&[])));
            }
            if spec.edge_count() > MAX_DP_EDGES {
                return Err(AttackError::TooLarge(format!("adaptive search supports at most {MAX_DP_EDGES} edges")));
            }
            let masks = family.iter().map(|s| s.iter().fold(0u64, |m, &e| m | 1 << (e - 1))).collect();
            let mut dp = Dp {
                table,
                family: masks,
                zeta,
                time_ordered,
                extendable: HashMap::new(),
                memo: HashMap::new(),
            };
            let worlds: Vec<u32> = (0..table.worlds as u32).collect();
            let (_, tree) = dp.solve(&worlds, &mut Vec::new());
            let strategy = wrap(tree);
            let dist = passive_distribution(table, &strategy)?;
            Ok((strategy, dist))
        }
    }
}

// ---------------------------------------------------------------------------
// Active sweep

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Enumerate every strategy when there are at most this many.
    pub exhaustive_limit: u64,
    /// Otherwise draw this many strategies at random.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { exhaustive_limit: 4096, samples: 64, seed: 0x5ec_2e7 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub exhaustive: bool,
    pub strategies: usize,
    /// Strategies whose view depends on the message.
    pub leaking: usize,
    /// Strategies whose view is not a relabeling of the view of their
    /// passive reduction (clean values on the same tapped edges).
    pub not_reducible: usize,
    pub max_leakage_bits: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub summary: SweepSummary,
    /// The first strategy of maximal leakage, with its distribution.
    pub worst: Option<(AttackStrategy, JointDist)>,
    /// First strategy (if any) without a passive reduction.
    pub first_irreducible: Option<AttackStrategy>,
}

struct Skeletons<'a> {
    spec_edges: usize,
    family: &'a [u64],
    zeta: usize,
    values: u32,
}

impl Skeletons<'_> {
    fn admissible(&self, mask: u64, last: usize) -> Vec<usize> {
        (last + 1..=self.spec_edges)
            .filter(|&e| {
                let m = mask | 1 << (e - 1);
                let earlier = if e >= 64 { u64::MAX } else { (1u64 << e) - 1 };
                self.family.iter().any(|&f| f & m == m && f & !m & earlier == 0)
            })
            .collect()
    }

    /// Number of active time-ordered strategies below a node at `depth`.
    /// Replacements on the last tap cannot affect any observation, so only
    /// inner nodes carry replacement maps.
    fn count(&self, mask: u64, last: usize, depth: usize) -> f64 {
        if depth == self.zeta {
            return 1.0;
        }
        let v = self.values as f64;
        self.admissible(mask, last)
            .into_iter()
            .map(|e| {
                if depth + 1 == self.zeta {
                    1.0
                } else {
                    v.powf(v) * self.count(mask | 1 << (e - 1), e, depth + 1).powf(v)
                }
            })
            .sum()
    }

    fn all(&self, mask: u64, last: usize, depth: usize) -> Vec<TreeNode> {
        let mut out = Vec::new();
        for e in self.admissible(mask, last) {
            if depth + 1 == self.zeta {
                out.push(TreeNode::leaf(e));
                continue;
            }
            let subs = self.all(mask | 1 << (e - 1), e, depth + 1);
            let v = self.values as usize;
            let maps = product_indices(v, v);
            for child_pick in product_indices(subs.len(), v) {
                for map in &maps {
                    let mut node = TreeNode::leaf(e);
                    for val in 0..v {
                        node.children.insert(val as u32, subs[child_pick[val]].clone());
                        if map[val] != val {
                            node.replace.insert(val as u32, map[val] as u32);
                        }
                    }
                    out.push(node);
                }
            }
        }
        out
    }

    fn sample(&self, rng: &mut ChaCha8Rng, mask: u64, last: usize, depth: usize) -> TreeNode {
        let options = self.admissible(mask, last);
        let e = options[rng.gen_range(0..options.len())];
        let mut node = TreeNode::leaf(e);
        if depth + 1 == self.zeta {
            return node;
        }
        for val in 0..self.values {
            node.children.insert(val, self.sample(rng, mask | 1 << (e - 1), e, depth + 1));
            let rep = rng.gen_range(0..self.values);
            if rep != val {
                node.replace.insert(val, rep);
            }
        }
        node
    }
}

/// All functions `[len] -> [base]` as index vectors.
fn product_indices(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..base).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Runs active time-ordered strategies (every one when few enough, a seeded
/// sample otherwise) and checks each against its passive reduction.
pub fn active_sweep(
    spec: &NetworkSpec,
    code: &NetworkCode,
    table: &WorldTable,
    config: &SweepConfig,
) -> Result<SweepResult, AttackError> {
    let zeta = spec.zeta();
    let mut summary =
        SweepSummary { exhaustive: true, strategies: 0, leaking: 0, not_reducible: 0, max_leakage_bits: 0.0 };
    if zeta == 0 {
        return Ok(SweepResult { summary, worst: None, first_irreducible: None });
    }
    if spec.edge_count() > MAX_DP_EDGES {
        return Err(AttackError::TooLarge(format!("active sweep supports at most {MAX_DP_EDGES} edges")));
    }
    let family: Vec<u64> =
        spec.attack_family()?.iter().map(|s| s.iter().fold(0u64, |m, &e| m | 1 << (e - 1))).collect();
    let values = (code.field.q() as u64).pow(code.n as u32);
    let sk = Skeletons { spec_edges: spec.edge_count(), family: &family, zeta, values: values as u32 };
    let count = sk.count(0, 0, 0);
    let trees = if count <= config.exhaustive_limit as f64 {
        sk.all(0, 0, 0)
    } else {
        summary.exhaustive = false;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        (0..config.samples).map(|_| sk.sample(&mut rng, 0, 0, 0)).collect()
    };
    let program = Program::new(spec, code)?;
    // Only the worst distribution is kept; it is recomputed at the end
    // instead of holding every strategy's tables at once.
    let evaluated: Vec<Result<(TreeNode, ActiveOutcome), AttackError>> = trees
        .into_par_iter()
        .map(|tree| {
            let eval = evaluate_active(&program, Some(&tree), table)?;
            let leak = eval.active.scaled_leakage();
            let reducible = eval.bijective && leak.cmp_exact(&eval.reduced.scaled_leakage()) == Ordering::Equal;
            let outcome = ActiveOutcome { leaking: !eval.active.is_independent(), reducible, leak };
            Ok((tree, outcome))
        })
        .collect();
    let mut worst: Option<(TreeNode, LogSum)> = None;
    let mut first_irreducible = None;
    for item in evaluated {
        let (tree, outcome) = item?;
        summary.strategies += 1;
        if !outcome.reducible {
            summary.not_reducible += 1;
            first_irreducible
                .get_or_insert_with(|| AttackStrategy::AdaptiveActive { tree: Some(tree.clone()) });
        }
        if outcome.leaking {
            summary.leaking += 1;
        }
        if worst.as_ref().is_none_or(|(_, b)| outcome.leak.cmp_exact(b) == Ordering::Greater) {
            worst = Some((tree, outcome.leak));
        }
    }
    let worst = match worst {
        Some((tree, _)) => {
            let dist = evaluate_active(&program, Some(&tree), table)?.active;
            summary.max_leakage_bits = dist.mutual_information();
            Some((AttackStrategy::AdaptiveActive { tree: Some(tree) }, dist))
        }
        None => None,
    };
    Ok(SweepResult { summary, worst, first_irreducible })
}

struct ActiveOutcome {
    leaking: bool,
    reducible: bool,
    leak: LogSum,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_fixture, build_relay};

    fn attack_i() -> TreeNode {
        TreeNode::with_children(1, [(1, TreeNode::leaf(3)), (0, TreeNode::leaf(4))])
    }

    #[test]
    fn deterministic_enumeration() {
        let (fig1, _) = build_fixture("fig1_nonlinear").unwrap();
        let sets: Vec<_> = enumerate_deterministic(&fig1).unwrap();
        assert_eq!(sets.len(), 4);
        assert_eq!(sets[0], AttackStrategy::Deterministic { edges: vec![1, 3] });
        let r1 = build_relay(1, &[3], &[1], 2, &[0]).unwrap();
        assert_eq!(enumerate_deterministic(&r1).unwrap().len(), 3);
    }

    #[test]
    fn tree_validation() {
        let (fig1, _) = build_fixture("fig1_nonlinear").unwrap();
        let ok = AttackStrategy::GeneralAdaptive { tree: Some(attack_i()) };
        assert!(make_adaptive(&fig1, ok).is_ok());
        let ii = TreeNode::with_children(2, [(1, TreeNode::leaf(4)), (0, TreeNode::leaf(3))]);
        assert!(make_adaptive(&fig1, AttackStrategy::TimeOrdered { tree: Some(ii) }).is_ok());
        let bad = TreeNode::with_children(1, [(0, TreeNode::leaf(2))]);
        assert_eq!(
            make_adaptive(&fig1, AttackStrategy::GeneralAdaptive { tree: Some(bad) }),
            Err(AttackError::InvalidBranchSet(vec![1, 2]))
        );
        let backwards = TreeNode::with_children(3, [(0, TreeNode::leaf(1))]);
        assert!(make_adaptive(&fig1, AttackStrategy::GeneralAdaptive { tree: Some(backwards.clone()) }).is_ok());
        assert_eq!(
            make_adaptive(&fig1, AttackStrategy::TimeOrdered { tree: Some(backwards) }),
            Err(AttackError::OrderViolation(vec![3, 1]))
        );
        let repeat = TreeNode::with_children(1, [(0, TreeNode::leaf(1))]);
        assert_eq!(
            make_adaptive(&fig1, AttackStrategy::GeneralAdaptive { tree: Some(repeat) }),
            Err(AttackError::RepeatedEdge(1))
        );
    }

    #[test]
    fn fig1_optimal_attacks() {
        let (spec, code) = build_fixture("fig1_nonlinear").unwrap();
        let (a0, _) = optimal_adaptive_leakage(&spec, &code, AttackClass::A0).unwrap();
        assert!((a0 - 0.5).abs() < 1e-12);
        let (a2, s) = optimal_adaptive_leakage(&spec, &code, AttackClass::A2).unwrap();
        assert_eq!(a2, 1.0);
        assert_eq!(s, AttackStrategy::GeneralAdaptive { tree: Some(attack_i()) });
    }

    #[test]
    fn active_identity_and_flip() {
        let (spec, code) = build_fixture("fig1_nonlinear").unwrap();
        let ident = AttackStrategy::AdaptiveActive { tree: Some(attack_i()) };
        let scr = BTreeMap::from([(1, vec![0])]);
        let (ex, view) = apply_active(&spec, &code, &ident, &[vec![1]], &scr).unwrap();
        assert_eq!(ex.edges, vec![vec![0], vec![1], vec![0], vec![1]]);
        assert_eq!(view.observed, vec![(1, vec![0]), (4, vec![1])]);

        let mut flip = attack_i();
        flip.replace.insert(0, 1);
        flip.replace.insert(1, 0);
        let flip = AttackStrategy::AdaptiveActive { tree: Some(flip) };
        let (ex, view) = apply_active(&spec, &code, &flip, &[vec![1]], &scr).unwrap();
        // Relay now sees (1, 1) and outputs (0, 0); decoder reads 0.
        assert_eq!(ex.edges, vec![vec![1], vec![1], vec![0], vec![0]]);
        assert_eq!(ex.decoded, vec![vec![0]]);
        assert_eq!(view.observed, vec![(1, vec![0]), (4, vec![0])]);
        assert_eq!(ex.modifications, BTreeMap::from([(1, vec![1])]));

        let passive = AttackStrategy::GeneralAdaptive { tree: Some(attack_i()) };
        assert!(apply_active(&spec, &code, &passive, &[vec![1]], &scr).is_err());
    }

    #[test]
    fn class_parsing() {
        assert_eq!("a2".parse::<AttackClass>().unwrap(), AttackClass::A2);
        assert!("A9".parse::<AttackClass>().is_err());
    }

    #[test]
    fn strategy_json_round_trip() {
        let mut t = attack_i();
        t.replace.insert(1, 0);
        let s = AttackStrategy::AdaptiveActive { tree: Some(t) };
        let back = AttackStrategy::from_json(&s.to_json().to_string()).unwrap();
        assert_eq!(s, back);
    }
}
