//! Layered acyclic networks, network codes and their execution.
//!
//! Node and edge ids are 1-based. Edges are numbered so that every node's
//! incoming edges precede its outgoing ones; the builders use the canonical
//! order (head layer, tail node, head node, parallel index).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{field_make, is_prime, Field, FieldMatrix, FieldSpec, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation needs a unicast network (a = b = 1)")]
    NotUnicast,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid network: {0}")]
    InvalidSpec(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Edge alphabet: a finite field, or a plain set of `d` letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alphabet {
    Field { p: u32, m: u32 },
    Plain { d: u64 },
}

impl Alphabet {
    /// Field alphabet when `d` is a prime power of at most 2^16, plain otherwise.
    pub fn from_size(d: u64) -> Alphabet {
        match prime_power_decomposition(d) {
            Some((p, m)) if d <= crate::gf::MAX_FIELD_SIZE => Alphabet::Field { p: p as u32, m },
            _ => Alphabet::Plain { d },
        }
    }

    pub fn size(&self) -> u64 {
        match *self {
            Alphabet::Field { p, m } => (p as u64).pow(m),
            Alphabet::Plain { d } => d,
        }
    }

    /// The largest prime-power sub-alphabet usable by a linear code.
    pub fn linear_subalphabet(&self) -> u64 {
        match *self {
            Alphabet::Field { .. } => self.size(),
            Alphabet::Plain { d } => {
                (2..=d).rev().find(|&x| prime_power_decomposition(x).is_some()).unwrap_or(1)
            }
        }
    }
}

/// `Some((p, e))` when `n = p^e` with `p` prime and `e >= 1`.
pub fn prime_power_decomposition(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..).take_while(|&f: &u64| f.saturating_mul(f) <= n).find(|f| n.is_multiple_of(*f)).unwrap_or(n);
    let mut rest = n;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    if rest == 1 {
        Some((p, e))
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub layer: usize,
}

/// A layered acyclic network with the eavesdropper's admissible taps.
///
/// `nodes[v - 1]` is the layer of node `v`. Sources are nodes `1..=a`,
/// terminals are the last `b` nodes. `tapped` lists collections of edge
/// subsets; an admissible deterministic attack picks one subset from each
/// collection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub layers: Vec<usize>,
    #[serde(default)]
    pub nodes: Vec<usize>,
    pub edges: Vec<Edge>,
    pub alphabet: Alphabet,
    pub tapped: Vec<Vec<Vec<usize>>>,
    #[serde(default)]
    pub gamma: Vec<u32>,
}

const MAX_ATTACK_FAMILY: usize = 1 << 20;

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<NetworkSpec, NetError> {
        let mut spec: NetworkSpec =
            serde_json::from_str(text).map_err(|e| NetError::Parse(e.to_string()))?;
        if spec.nodes.is_empty() {
            spec.nodes = spec
                .layers
                .iter()
                .enumerate()
                .flat_map(|(layer, &count)| std::iter::repeat_n(layer, count))
                .collect();
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("network spec serializes")
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id - 1]
    }

    pub fn sources(&self) -> Vec<usize> {
        (1..=self.a).collect()
    }

    pub fn terminals(&self) -> Vec<usize> {
        let v = self.node_count();
        (v + 1 - self.b..=v).collect()
    }

    pub fn in_edges(&self, node: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.to == node).map(|e| e.id).collect()
    }

    pub fn out_edges(&self, node: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.from == node).map(|e| e.id).collect()
    }

    /// Nodes with outgoing edges only that are not message sources.
    pub fn pseudo_sources(&self) -> Vec<usize> {
        let sources: BTreeSet<usize> = self.sources().into_iter().collect();
        (1..=self.node_count())
            .filter(|v| !sources.contains(v))
            .filter(|&v| self.in_edges(v).is_empty() && !self.out_edges(v).is_empty())
            .collect()
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let invalid = |msg: String| Err(NetError::InvalidSpec(msg));
        let v = self.node_count();
        if self.layers.iter().sum::<usize>() != v {
            return invalid("layer sizes do not add up to the node count".into());
        }
        for layer in 0..self.layers.len() {
            if self.nodes.iter().filter(|&&l| l == layer).count() != self.layers[layer] {
                return invalid(format!("layer {layer} size disagrees with node list"));
            }
        }
        if self.a == 0 || self.b == 0 || self.a + self.b > v {
            return invalid("source/terminal counts do not fit the node list".into());
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.id != i + 1 {
                return invalid(format!("edge ids must be 1..={} in order", self.edges.len()));
            }
            if e.from == 0 || e.to == 0 || e.from > v || e.to > v {
                return invalid(format!("edge {} references a missing node", e.id));
            }
            if self.nodes[e.from - 1] >= self.nodes[e.to - 1] {
                return invalid(format!("edge {} does not go to a later layer", e.id));
            }
            if e.layer != self.nodes[e.to - 1] {
                return invalid(format!("edge {} layer must equal its head's layer", e.id));
            }
        }
        for node in 1..=v {
            let (ins, outs) = (self.in_edges(node), self.out_edges(node));
            if let (Some(&last_in), Some(&first_out)) = (ins.iter().max(), outs.iter().min()) {
                if last_in > first_out {
                    return invalid(format!(
                        "node {node}: incoming edge {last_in} is numbered after outgoing edge {first_out}"
                    ));
                }
            }
        }
        for (g, group) in self.tapped.iter().enumerate() {
            if group.is_empty() {
                return invalid(format!("tapped collection {g} is empty"));
            }
            let size = group[0].len();
            for set in group {
                if set.len() != size {
                    return invalid(format!("tapped collection {g} mixes subset sizes"));
                }
                if set.iter().any(|&e| e == 0 || e > self.edges.len()) {
                    return invalid(format!("tapped collection {g} references a missing edge"));
                }
                let distinct: BTreeSet<_> = set.iter().collect();
                if distinct.len() != set.len() {
                    return invalid(format!("tapped collection {g} repeats an edge"));
                }
            }
        }
        if let Alphabet::Field { p, m } = self.alphabet {
            if !is_prime(p as u64) || m == 0 {
                return invalid("field alphabet needs a prime p and m >= 1".into());
            }
        }
        Ok(())
    }

    /// Number of edges in every admissible tap set.
    pub fn zeta(&self) -> usize {
        self.tapped.iter().map(|g| g[0].len()).sum()
    }

    /// All admissible deterministic tap sets, each sorted, in lexicographic order.
    pub fn attack_family(&self) -> Result<Vec<Vec<usize>>, NetError> {
        let total = self
            .tapped
            .iter()
            .try_fold(1usize, |acc, g| acc.checked_mul(g.len()))
            .filter(|&t| t <= MAX_ATTACK_FAMILY)
            .ok_or_else(|| NetError::TooLarge("admissible tap family exceeds 2^20 sets".into()))?;
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.tapped.len()];
        loop {
            let mut set: Vec<usize> =
                idx.iter().zip(&self.tapped).flat_map(|(&i, g)| g[i].iter().copied()).collect();
            set.sort_unstable();
            set.dedup();
            if set.len() == self.zeta() {
                out.push(set);
            }
            let mut pos = self.tapped.len();
            loop {
                if pos == 0 {
                    out.sort();
                    out.dedup();
                    return Ok(out);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < self.tapped[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

/// Lexicographically ordered `r`-subsets of `items`.
pub fn subsets<T: Copy>(items: &[T], r: usize) -> Vec<Vec<T>> {
    let n = items.len();
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - r + i {
                idx[i] += 1;
                for j in i + 1..r {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
    }
}

fn product_of_subsets(groups: &[Vec<Vec<usize>>]) -> Result<Vec<Vec<usize>>, NetError> {
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for g in groups {
        if acc.len().saturating_mul(g.len()) > MAX_ATTACK_FAMILY {
            return Err(NetError::TooLarge("tapped collection exceeds 2^20 sets".into()));
        }
        acc = acc
            .iter()
            .flat_map(|prefix| {
                g.iter().map(move |s| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(s);
                    v.sort_unstable();
                    v
                })
            })
            .collect();
    }
    Ok(acc)
}

/// Unicast chain of `c` hops with `k[i]` parallel edges on hop `i`, where
/// the eavesdropper reads any `r[i]` of them.
pub fn build_relay(
    c: usize,
    k: &[usize],
    r: &[usize],
    d: u64,
    gamma: &[u32],
) -> Result<NetworkSpec, NetError> {
    if c == 0 || k.len() != c || r.len() != c {
        return Err(NetError::BadParams(format!("need {c} hop sizes and tap counts")));
    }
    if !gamma.is_empty() && gamma.len() != c {
        return Err(NetError::BadParams(format!("need {c} randomness budgets")));
    }
    if d < 2 {
        return Err(NetError::BadParams("alphabet needs at least 2 letters".into()));
    }
    for i in 0..c {
        if k[i] == 0 || r[i] > k[i] {
            return Err(NetError::BadParams(format!(
                "hop {}: need 0 <= r <= k and k >= 1, got k={}, r={}",
                i + 1,
                k[i],
                r[i]
            )));
        }
    }
    let mut edges = Vec::new();
    let mut tapped = Vec::new();
    for hop in 0..c {
        let ids: Vec<usize> = (0..k[hop]).map(|j| edges.len() + j + 1).collect();
        for &id in &ids {
            edges.push(Edge { id, from: hop + 1, to: hop + 2, layer: hop + 1 });
        }
        if r[hop] > 0 {
            tapped.push(subsets(&ids, r[hop]));
        }
    }
    let spec = NetworkSpec {
        a: 1,
        b: 1,
        c,
        layers: vec![1; c + 1],
        nodes: (0..=c).collect(),
        edges,
        alphabet: Alphabet::from_size(d),
        tapped,
        gamma: if gamma.is_empty() { vec![0; c] } else { gamma.to_vec() },
    };
    spec.validate()?;
    Ok(spec)
}

/// Complete layered network: `a` sources, groups of sizes `b_list`
/// (`b_list[i-1]` nodes in layer `i`, the last being the `b` terminals),
/// `k[i]` parallel edges between every pair of consecutive-layer nodes.
///
/// With one source the eavesdropper reads `r[i]` of the incoming edges of
/// every layer-`i` node. With several sources the first layer is tapped per
/// (source, node) pair, `r[0]` of its `k[0]` edges.
pub fn build_multicast(
    a: usize,
    b: usize,
    c: usize,
    b_list: &[usize],
    k: &[usize],
    r: &[usize],
    d: u64,
) -> Result<NetworkSpec, NetError> {
    if a == 0 || b == 0 || c == 0 || k.len() != c || r.len() != c {
        return Err(NetError::BadParams(format!("need a, b, c >= 1 and {c} hop parameters")));
    }
    let mut layers = vec![a];
    match b_list.len() {
        n if n == c - 1 => layers.extend_from_slice(b_list),
        n if n == c && b_list[c - 1] == b => layers.extend_from_slice(&b_list[..c - 1]),
        _ => {
            return Err(NetError::BadParams(
                "group sizes must list the c - 1 intermediate groups".into(),
            ))
        }
    }
    layers.push(b);
    if layers.contains(&0) || k.contains(&0) {
        return Err(NetError::BadParams("layer sizes and edge multiplicities must be positive".into()));
    }
    if d < 2 {
        return Err(NetError::BadParams("alphabet needs at least 2 letters".into()));
    }
    for i in 1..=c {
        let limit = if i == 1 && a > 1 { k[0] } else { layers[i - 1] * k[i - 1] };
        if r[i - 1] > limit {
            return Err(NetError::BadParams(format!(
                "layer {i}: tapping {} edges exceeds the {limit} available",
                r[i - 1]
            )));
        }
    }
    let first_of_layer: Vec<usize> =
        layers.iter().scan(1usize, |next, &s| Some(std::mem::replace(next, *next + s))).collect();
    let mut edges = Vec::new();
    let mut tapped = Vec::new();
    for i in 1..=c {
        let mut into: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for u in 0..layers[i - 1] {
            for w in 0..layers[i] {
                for _ in 0..k[i - 1] {
                    let id = edges.len() + 1;
                    let (from, to) = (first_of_layer[i - 1] + u, first_of_layer[i] + w);
                    edges.push(Edge { id, from, to, layer: i });
                    let key = if i == 1 && a > 1 { (to, from) } else { (to, 0) };
                    into.entry(key).or_default().push(id);
                }
            }
        }
        if r[i - 1] > 0 {
            let groups: Vec<Vec<Vec<usize>>> =
                into.values().map(|ids| subsets(ids, r[i - 1])).collect();
            tapped.push(product_of_subsets(&groups)?);
        }
    }
    let spec = NetworkSpec {
        a,
        b,
        c,
        nodes: layers
            .iter()
            .enumerate()
            .flat_map(|(l, &s)| std::iter::repeat_n(l, s))
            .collect(),
        layers,
        edges,
        alphabet: Alphabet::from_size(d),
        tapped,
        gamma: vec![0; c],
    };
    spec.validate()?;
    Ok(spec)
}

// ---------------------------------------------------------------------------
// Codes

/// One message: `symbols` field symbols from `source` to `terminal`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageSpec {
    pub source: usize,
    pub terminal: usize,
    pub symbols: usize,
}

/// Exhaustive map from packed input (little-endian base q) to output symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableMap {
    pub inputs: usize,
    pub outputs: usize,
    pub rows: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalMap {
    Linear(FieldMatrix),
    Table(TableMap),
}

impl LocalMap {
    pub fn inputs(&self) -> usize {
        match self {
            LocalMap::Linear(m) => m.cols,
            LocalMap::Table(t) => t.inputs,
        }
    }
    pub fn outputs(&self) -> usize {
        match self {
            LocalMap::Linear(m) => m.rows,
            LocalMap::Table(t) => t.outputs,
        }
    }
    pub fn is_linear(&self) -> bool {
        matches!(self, LocalMap::Linear(_))
    }

    #[inline]
    fn apply(&self, field: &Field, input: &[u32], out: &mut [u32]) {
        match self {
            LocalMap::Linear(m) => m.mul_vec_into(input, out),
            LocalMap::Table(t) => {
                let q = field.q() as usize;
                let idx = input.iter().rev().fold(0usize, |acc, &s| acc * q + s as usize);
                out.copy_from_slice(&t.rows[idx]);
            }
        }
    }
}

/// Encoder of one node. Its input is the node's own message symbols (in
/// message order), then its scramble symbols, then the symbols of its
/// incoming edges (edge-id order, `n` each); its output is the symbols of
/// its outgoing edges in edge-id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeCode {
    pub node: usize,
    pub scrambles: usize,
    pub map: LocalMap,
}

/// Decoder at a terminal: incoming edge symbols to the symbols of `messages`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoderCode {
    pub node: usize,
    pub messages: Vec<usize>,
    pub map: LocalMap,
}

/// A network code with block length `n`: every edge carries `n` symbols of `field`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkCode {
    pub n: usize,
    pub field: Field,
    pub messages: Vec<MessageSpec>,
    pub nodes: Vec<NodeCode>,
    pub decoders: Vec<DecoderCode>,
}

impl NetworkCode {
    pub fn is_linear(&self) -> bool {
        self.nodes.iter().all(|n| n.map.is_linear()) && self.decoders.iter().all(|d| d.map.is_linear())
    }

    pub fn message_symbols(&self) -> usize {
        self.messages.iter().map(|m| m.symbols).sum()
    }

    pub fn scramble_symbols(&self) -> usize {
        self.nodes.iter().map(|n| n.scrambles).sum()
    }

    pub fn node(&self, id: usize) -> Option<&NodeCode> {
        self.nodes.iter().find(|n| n.node == id)
    }

    /// Scramble symbols used by every node other than the sources.
    pub fn intermediate_scrambles(&self, spec: &NetworkSpec) -> BTreeMap<usize, usize> {
        self.nodes
            .iter()
            .filter(|n| n.node > spec.a && n.scrambles > 0)
            .map(|n| (n.node, n.scrambles))
            .collect()
    }

    fn own_messages(&self, node: usize) -> impl Iterator<Item = (usize, &MessageSpec)> {
        self.messages.iter().enumerate().filter(move |(_, m)| m.source == node)
    }

    /// Checks arities and node roles against `spec`.
    pub fn check(&self, spec: &NetworkSpec) -> Result<(), NetError> {
        let bad = |msg: String| Err(NetError::InvalidCode(msg));
        if self.n == 0 {
            return bad("block length must be positive".into());
        }
        if let Alphabet::Field { p, m } = spec.alphabet {
            // The code may run over an extension of the declared alphabet.
            if self.field.p() != p || !self.field.m().is_multiple_of(m) {
                return bad(format!("code field {:?} is not an extension of GF({p}^{m})", self.field));
            }
        }
        let v = spec.node_count();
        for msg in &self.messages {
            if msg.source == 0 || msg.source > v || msg.terminal == 0 || msg.terminal > v {
                return bad("message endpoints reference missing nodes".into());
            }
        }
        let mut seen = BTreeSet::new();
        for nc in &self.nodes {
            if nc.node == 0 || nc.node > v || !seen.insert(nc.node) {
                return bad(format!("encoder for node {} is missing or repeated", nc.node));
            }
            let own: usize = self.own_messages(nc.node).map(|(_, m)| m.symbols).sum();
            let want_in = own + nc.scrambles + self.n * spec.in_edges(nc.node).len();
            let want_out = self.n * spec.out_edges(nc.node).len();
            if nc.map.inputs() != want_in || nc.map.outputs() != want_out {
                return Err(NetError::DimensionMismatch(format!(
                    "node {}: encoder is {}->{}, expected {}->{}",
                    nc.node,
                    nc.map.inputs(),
                    nc.map.outputs(),
                    want_in,
                    want_out
                )));
            }
        }
        for node in 1..=v {
            if !spec.out_edges(node).is_empty() && !seen.contains(&node) {
                return bad(format!("node {node} has outgoing edges but no encoder"));
            }
        }
        for dc in &self.decoders {
            if dc.messages.iter().any(|&i| i >= self.messages.len() || self.messages[i].terminal != dc.node)
            {
                return bad(format!("decoder at node {} lists messages not addressed to it", dc.node));
            }
            let want_in = self.n * spec.in_edges(dc.node).len();
            let want_out: usize = dc.messages.iter().map(|&i| self.messages[i].symbols).sum();
            if dc.map.inputs() != want_in || dc.map.outputs() != want_out {
                return Err(NetError::DimensionMismatch(format!(
                    "decoder at node {}: map is {}->{}, expected {}->{}",
                    dc.node,
                    dc.map.inputs(),
                    dc.map.outputs(),
                    want_in,
                    want_out
                )));
            }
        }
        for map in self.nodes.iter().map(|n| &n.map).chain(self.decoders.iter().map(|d| &d.map)) {
            match map {
                LocalMap::Linear(m) if m.field != self.field => {
                    return bad("linear map over a different field".into())
                }
                LocalMap::Table(t) => {
                    let size = (self.field.q() as u128).checked_pow(t.inputs as u32);
                    if size != Some(t.rows.len() as u128)
                        || t.rows.iter().any(|r| r.len() != t.outputs || r.iter().any(|&s| s >= self.field.q()))
                    {
                        return bad("table map does not cover its input space".into());
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map_dto = |m: &LocalMap| match m {
            LocalMap::Linear(mat) => MapDto::Linear { cols: mat.cols, matrix: mat.to_rows() },
            LocalMap::Table(t) => MapDto::Table {
                table: TableDto { inputs: t.inputs, outputs: t.outputs, rows: t.rows.clone() },
            },
        };
        let dto = CodeDto {
            n: self.n,
            field: self.field.spec().clone(),
            messages: self.messages.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDto { id: n.node, scrambles: n.scrambles, map: map_dto(&n.map) })
                .collect(),
            decoders: self
                .decoders
                .iter()
                .map(|d| DecoderDto { id: d.node, messages: d.messages.clone(), map: map_dto(&d.map) })
                .collect(),
        };
        serde_json::to_value(dto).expect("code serializes")
    }

    pub fn from_json(text: &str) -> Result<NetworkCode, NetError> {
        let dto: CodeDto = serde_json::from_str(text).map_err(|e| NetError::Parse(e.to_string()))?;
        let field = Field::from_spec(dto.field)?;
        let map = |m: MapDto| -> Result<LocalMap, NetError> {
            Ok(match m {
                MapDto::Linear { cols, matrix } => {
                    let mut mat = FieldMatrix::from_rows(&field, &matrix)?;
                    if matrix.is_empty() {
                        mat.cols = cols;
                    } else if mat.cols != cols {
                        return Err(NetError::DimensionMismatch("matrix width disagrees with cols".into()));
                    }
                    LocalMap::Linear(mat)
                }
                MapDto::Table { table } => {
                    LocalMap::Table(TableMap { inputs: table.inputs, outputs: table.outputs, rows: table.rows })
                }
            })
        };
        Ok(NetworkCode {
            n: dto.n,
            messages: dto.messages,
            nodes: dto
                .nodes
                .into_iter()
                .map(|n| Ok(NodeCode { node: n.id, scrambles: n.scrambles, map: map(n.map)? }))
                .collect::<Result<_, NetError>>()?,
            decoders: dto
                .decoders
                .into_iter()
                .map(|d| Ok(DecoderCode { node: d.id, messages: d.messages, map: map(d.map)? }))
                .collect::<Result<_, NetError>>()?,
            field,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TableDto {
    inputs: usize,
    outputs: usize,
    rows: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MapDto {
    Linear { cols: usize, matrix: Vec<Vec<u32>> },
    Table { table: TableDto },
}

#[derive(Serialize, Deserialize)]
struct NodeDto {
    id: usize,
    #[serde(default)]
    scrambles: usize,
    #[serde(flatten)]
    map: MapDto,
}

#[derive(Serialize, Deserialize)]
struct DecoderDto {
    id: usize,
    messages: Vec<usize>,
    #[serde(flatten)]
    map: MapDto,
}

#[derive(Serialize, Deserialize)]
struct CodeDto {
    n: usize,
    field: FieldSpec,
    messages: Vec<MessageSpec>,
    nodes: Vec<NodeDto>,
    decoders: Vec<DecoderDto>,
}

// ---------------------------------------------------------------------------
// Execution

struct Step {
    first_edge: usize,
    map_index: usize,
    gather: Vec<usize>,
    scatter: Vec<usize>,
}

struct DecodeStep {
    decoder_index: usize,
    gather: Vec<usize>,
}

/// A code compiled against its network into a flat evaluation plan.
///
/// The working buffer holds all message symbols, then all scramble symbols
/// (node order), then `n` symbols per edge in edge-id order.
pub struct Program<'a> {
    pub spec: &'a NetworkSpec,
    pub code: &'a NetworkCode,
    steps: Vec<Step>,
    decode_steps: Vec<DecodeStep>,
    message_offsets: Vec<usize>,
    scramble_offsets: BTreeMap<usize, usize>,
    pub message_len: usize,
    pub input_len: usize,
    pub edge_offset: usize,
}

impl<'a> Program<'a> {
    pub fn new(spec: &'a NetworkSpec, code: &'a NetworkCode) -> Result<Program<'a>, NetError> {
        code.check(spec)?;
        let n = code.n;
        let mut message_offsets = Vec::new();
        let mut pos = 0;
        for m in &code.messages {
            message_offsets.push(pos);
            pos += m.symbols;
        }
        let message_len = pos;
        let mut order: Vec<&NodeCode> = code.nodes.iter().collect();
        order.sort_by_key(|nc| nc.node);
        let mut scramble_offsets = BTreeMap::new();
        for nc in &order {
            scramble_offsets.insert(nc.node, pos);
            pos += nc.scrambles;
        }
        let input_len = pos;
        let edge_offset = pos;
        let mut steps: Vec<Step> = code
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(map_index, nc)| {
                let outs = spec.out_edges(nc.node);
                let first = *outs.first()?;
                let mut gather = Vec::new();
                for (i, m) in code.own_messages(nc.node) {
                    gather.extend(message_offsets[i]..message_offsets[i] + m.symbols);
                }
                let s0 = scramble_offsets[&nc.node];
                gather.extend(s0..s0 + nc.scrambles);
                for e in spec.in_edges(nc.node) {
                    let at = edge_offset + (e - 1) * n;
                    gather.extend(at..at + n);
                }
                let scatter = outs.iter().map(|&e| edge_offset + (e - 1) * n).collect();
                Some(Step { first_edge: first, map_index, gather, scatter })
            })
            .collect();
        steps.sort_by_key(|s| s.first_edge);
        let decode_steps = code
            .decoders
            .iter()
            .enumerate()
            .map(|(decoder_index, dc)| {
                let mut gather = Vec::new();
                for e in spec.in_edges(dc.node) {
                    let at = edge_offset + (e - 1) * n;
                    gather.extend(at..at + n);
                }
                DecodeStep { decoder_index, gather }
            })
            .collect();
        Ok(Program {
            spec,
            code,
            steps,
            decode_steps,
            message_offsets,
            scramble_offsets,
            message_len,
            input_len,
            edge_offset,
        })
    }

    pub fn buffer_len(&self) -> usize {
        self.edge_offset + self.code.n * self.spec.edge_count()
    }

    pub fn scramble_offset(&self, node: usize) -> Option<usize> {
        self.scramble_offsets.get(&node).copied()
    }

    pub fn message_offset(&self, index: usize) -> usize {
        self.message_offsets[index]
    }

    /// Evaluates all encoders on `buf` (inputs already filled). `hook` runs
    /// once per edge in increasing id order, right after the edge's symbols
    /// are produced, and may overwrite them.
    pub fn run<H>(&self, buf: &mut [u32], scratch: &mut Scratch, mut hook: H)
    where
        H: FnMut(usize, &mut [u32]),
    {
        let n = self.code.n;
        let field = &self.code.field;
        let mut next = 0;
        for e in 1..=self.spec.edge_count() {
            while next < self.steps.len() && self.steps[next].first_edge == e {
                let step = &self.steps[next];
                scratch.input.clear();
                scratch.input.extend(step.gather.iter().map(|&i| buf[i]));
                let map = &self.code.nodes[step.map_index].map;
                scratch.output.resize(map.outputs(), 0);
                map.apply(field, &scratch.input, &mut scratch.output);
                for (k, &at) in step.scatter.iter().enumerate() {
                    buf[at..at + n].copy_from_slice(&scratch.output[k * n..(k + 1) * n]);
                }
                next += 1;
            }
            let at = self.edge_offset + (e - 1) * n;
            hook(e, &mut buf[at..at + n]);
        }
    }

    /// Runs every decoder on the edge values in `buf`; the result holds the
    /// decoded symbols of each message (messages nobody decodes stay empty).
    pub fn decode(&self, buf: &[u32], scratch: &mut Scratch) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.code.messages.len()];
        for ds in &self.decode_steps {
            let dc = &self.code.decoders[ds.decoder_index];
            scratch.input.clear();
            scratch.input.extend(ds.gather.iter().map(|&i| buf[i]));
            scratch.output.resize(dc.map.outputs(), 0);
            dc.map.apply(&self.code.field, &scratch.input, &mut scratch.output);
            let mut pos = 0;
            for &mi in &dc.messages {
                let len = self.code.messages[mi].symbols;
                out[mi] = scratch.output[pos..pos + len].to_vec();
                pos += len;
            }
        }
        out
    }

    /// True when every decoder output equals the message it decodes.
    pub fn decodes_correctly(&self, buf: &[u32], scratch: &mut Scratch) -> bool {
        let decoded = self.decode(buf, scratch);
        self.code.messages.iter().enumerate().all(|(i, m)| {
            let at = self.message_offsets[i];
            decoded[i].as_slice() == &buf[at..at + m.symbols]
        })
    }
}

/// Reusable temporary storage for [`Program::run`].
#[derive(Default)]
pub struct Scratch {
    input: Vec<u32>,
    output: Vec<u32>,
}

/// Result of running a code once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Execution {
    /// `edges[e - 1]` holds the `n` symbols carried by edge `e`.
    pub edges: Vec<Vec<u32>>,
    /// Decoded symbols per message, in message order.
    pub decoded: Vec<Vec<u32>>,
    /// Replacements that were applied, by edge id.
    pub modifications: BTreeMap<usize, Vec<u32>>,
}

/// Runs `code` on concrete inputs. `messages[i]` feeds message `i`;
/// `scrambles` maps node ids to their scramble symbols; each entry of
/// `modifications` replaces an edge's symbols as soon as it is produced.
pub fn execute(
    spec: &NetworkSpec,
    code: &NetworkCode,
    messages: &[Vec<u32>],
    scrambles: &BTreeMap<usize, Vec<u32>>,
    modifications: &BTreeMap<usize, Vec<u32>>,
) -> Result<Execution, NetError> {
    let program = Program::new(spec, code)?;
    let mut buf = vec![0u32; program.buffer_len()];
    program.load_inputs(&mut buf, messages, scrambles)?;
    for (&e, vals) in modifications {
        if e == 0 || e > spec.edge_count() || vals.len() != code.n {
            return Err(NetError::DimensionMismatch(format!("modification of edge {e}")));
        }
        if vals.iter().any(|&v| v >= code.field.q()) {
            return Err(NetError::DimensionMismatch(format!("modification of edge {e} leaves the field")));
        }
    }
    let mut scratch = Scratch::default();
    program.run(&mut buf, &mut scratch, |e, vals| {
        if let Some(rep) = modifications.get(&e) {
            vals.copy_from_slice(rep);
        }
    });
    let n = code.n;
    let edges = (0..spec.edge_count())
        .map(|i| buf[program.edge_offset + i * n..program.edge_offset + (i + 1) * n].to_vec())
        .collect();
    let decoded = program.decode(&buf, &mut scratch);
    Ok(Execution { edges, decoded, modifications: modifications.clone() })
}

impl Program<'_> {
    pub fn load_inputs(
        &self,
        buf: &mut [u32],
        messages: &[Vec<u32>],
        scrambles: &BTreeMap<usize, Vec<u32>>,
    ) -> Result<(), NetError> {
        let code = self.code;
        let q = code.field.q();
        if messages.len() != code.messages.len() {
            return Err(NetError::DimensionMismatch(format!(
                "code has {} messages, got {}",
                code.messages.len(),
                messages.len()
            )));
        }
        for (i, (m, vals)) in code.messages.iter().zip(messages).enumerate() {
            if vals.len() != m.symbols || vals.iter().any(|&v| v >= q) {
                return Err(NetError::DimensionMismatch(format!("message {i} needs {} symbols", m.symbols)));
            }
            let at = self.message_offsets[i];
            buf[at..at + m.symbols].copy_from_slice(vals);
        }
        for nc in &code.nodes {
            let vals = scrambles.get(&nc.node).map(|v| v.as_slice()).unwrap_or(&[]);
            if vals.len() != nc.scrambles || vals.iter().any(|&v| v >= q) {
                return Err(NetError::DimensionMismatch(format!(
                    "node {} needs {} scramble symbols",
                    nc.node, nc.scrambles
                )));
            }
            let at = self.scramble_offsets[&nc.node];
            buf[at..at + nc.scrambles].copy_from_slice(vals);
        }
        if let Some(&extra) = scrambles.keys().find(|k| code.node(**k).is_none()) {
            return Err(NetError::DimensionMismatch(format!("node {extra} has no scramble input")));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Cuts

const MAX_CUT_EDGES: usize = 24;

/// `(mincut1, mincut2)` between the source and the terminal of a unicast
/// network. A cut is a set of edges whose removal disconnects the two in
/// the underlying undirected graph; the second count first drops every
/// edge leaving a pseudo source.
pub fn mincuts(spec: &NetworkSpec) -> Result<(usize, usize), NetError> {
    if spec.a != 1 || spec.b != 1 {
        return Err(NetError::NotUnicast);
    }
    if spec.edge_count() > MAX_CUT_EDGES {
        return Err(NetError::TooLarge(format!(
            "exhaustive cut search is limited to {MAX_CUT_EDGES} edges"
        )));
    }
    let all: Vec<usize> = (1..=spec.edge_count()).collect();
    let pseudo: BTreeSet<usize> = spec.pseudo_sources().into_iter().collect();
    let kept: Vec<usize> = all.iter().copied().filter(|&e| !pseudo.contains(&spec.edge(e).from)).collect();
    Ok((min_cut_over(spec, &all), min_cut_over(spec, &kept)))
}

fn min_cut_over(spec: &NetworkSpec, edges: &[usize]) -> usize {
    let source = 1;
    let terminal = spec.node_count();
    for size in 0..=edges.len() {
        for removed in subsets(edges, size) {
            let removed: BTreeSet<usize> = removed.into_iter().collect();
            if !connected(spec, edges, &removed, source, terminal) {
                return size;
            }
        }
    }
    edges.len()
}

fn connected(spec: &NetworkSpec, edges: &[usize], removed: &BTreeSet<usize>, s: usize, t: usize) -> bool {
    let mut seen = vec![false; spec.node_count() + 1];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(v) = stack.pop() {
        if v == t {
            return true;
        }
        for &e in edges {
            if removed.contains(&e) {
                continue;
            }
            let edge = spec.edge(e);
            let other = if edge.from == v {
                edge.to
            } else if edge.to == v {
                edge.from
            } else {
                continue;
            };
            if !seen[other] {
                seen[other] = true;
                stack.push(other);
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Fixtures

/// Named reference instances: `fig1_nonlinear` (alias `fig1`; a two-hop relay over GF(2)
/// whose relay applies a non-linear map) and `five_node` (a unicast network
/// with one pseudo source, secure against any single tapped edge).
pub fn build_fixture(name: &str) -> Result<(NetworkSpec, NetworkCode), NetError> {
    match name {
        "fig1_nonlinear" | "fig1" => Ok(fig1_nonlinear()),
        "five_node" => Ok(five_node()),
        other => Err(NetError::UnknownFixture(other.to_string())),
    }
}

pub const FIXTURES: [&str; 2] = ["fig1_nonlinear", "five_node"];

fn fig1_nonlinear() -> (NetworkSpec, NetworkCode) {
    let edges = vec![
        Edge { id: 1, from: 1, to: 2, layer: 1 },
        Edge { id: 2, from: 1, to: 2, layer: 1 },
        Edge { id: 3, from: 2, to: 3, layer: 2 },
        Edge { id: 4, from: 2, to: 3, layer: 2 },
    ];
    let spec = NetworkSpec {
        a: 1,
        b: 1,
        c: 2,
        layers: vec![1, 1, 1],
        nodes: vec![0, 1, 2],
        edges,
        alphabet: Alphabet::Field { p: 2, m: 1 },
        tapped: vec![vec![vec![1], vec![2]], vec![vec![3], vec![4]]],
        gamma: vec![0, 0],
    };
    let f = field_make(2, 1).expect("GF(2)");
    let mat = |rows: &[Vec<u32>]| LocalMap::Linear(FieldMatrix::from_rows(&f, rows).expect("matrix"));
    // Relay: (Y1, Y2) -> (Y1 (Y2 + 1), (Y1 + 1) Y2), input index Y1 + 2 Y2.
    let relay_rows = (0u32..4)
        .map(|idx| {
            let (y1, y2) = (idx & 1, idx >> 1);
            vec![y1 & (y2 ^ 1), (y1 ^ 1) & y2]
        })
        .collect();
    let code = NetworkCode {
        n: 1,
        field: f.clone(),
        messages: vec![MessageSpec { source: 1, terminal: 3, symbols: 1 }],
        nodes: vec![
            // (M, L) -> (L, M + L)
            NodeCode { node: 1, scrambles: 1, map: mat(&[vec![0, 1], vec![1, 1]]) },
            NodeCode {
                node: 2,
                scrambles: 0,
                map: LocalMap::Table(TableMap { inputs: 2, outputs: 2, rows: relay_rows }),
            },
        ],
        decoders: vec![DecoderCode { node: 3, messages: vec![0], map: mat(&[vec![1, 1]]) }],
    };
    (spec, code)
}

fn five_node() -> (NetworkSpec, NetworkCode) {
    // Node 1 source, node 4 pseudo source, node 5 terminal.
    let edges = vec![
        Edge { id: 1, from: 1, to: 2, layer: 1 },
        Edge { id: 2, from: 1, to: 2, layer: 1 },
        Edge { id: 3, from: 4, to: 2, layer: 1 },
        Edge { id: 4, from: 2, to: 3, layer: 2 },
        Edge { id: 5, from: 3, to: 5, layer: 3 },
        Edge { id: 6, from: 4, to: 5, layer: 3 },
    ];
    let spec = NetworkSpec {
        a: 1,
        b: 1,
        c: 3,
        layers: vec![2, 1, 1, 1],
        nodes: vec![0, 1, 2, 0, 3],
        edges,
        alphabet: Alphabet::Field { p: 3, m: 1 },
        tapped: vec![(1..=6).map(|e| vec![e]).collect()],
        gamma: vec![0, 0, 0],
    };
    let f = field_make(3, 1).expect("GF(3)");
    let mat = |rows: &[Vec<u32>]| LocalMap::Linear(FieldMatrix::from_rows(&f, rows).expect("matrix"));
    let code = NetworkCode {
        n: 1,
        field: f.clone(),
        messages: vec![MessageSpec { source: 1, terminal: 5, symbols: 1 }],
        nodes: vec![
            // (M, L1) -> (L1, M + L1)
            NodeCode { node: 1, scrambles: 1, map: mat(&[vec![0, 1], vec![1, 1]]) },
            // (Y1, Y2, Y3) -> Y2 - Y1 + Y3 = M + L2
            NodeCode { node: 2, scrambles: 0, map: mat(&[vec![2, 1, 1]]) },
            NodeCode { node: 3, scrambles: 0, map: mat(&[vec![1]]) },
            // L2 -> (Y3, Y6)
            NodeCode { node: 4, scrambles: 1, map: mat(&[vec![1], vec![1]]) },
        ],
        decoders: vec![DecoderCode { node: 5, messages: vec![0], map: mat(&[vec![1, 2]]) }],
    };
    (spec, code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_fig1(m: u32, l: u32, mods: &[(usize, u32)]) -> Execution {
        let (spec, code) = build_fixture("fig1_nonlinear").unwrap();
        let scr = BTreeMap::from([(1, vec![l])]);
        let mods = mods.iter().map(|&(e, v)| (e, vec![v])).collect();
        execute(&spec, &code, &[vec![m]], &scr, &mods).unwrap()
    }

    fn flat(ex: &Execution) -> Vec<u32> {
        ex.edges.iter().map(|v| v[0]).collect()
    }

    #[test]
    fn fig1_worked_values() {
        let ex = run_fig1(1, 0, &[]);
        assert_eq!(flat(&ex), vec![0, 1, 0, 1]);
        assert_eq!(ex.decoded, vec![vec![1]]);
        let ex = run_fig1(0, 0, &[]);
        assert_eq!(flat(&ex), vec![0, 0, 0, 0]);
        assert_eq!(ex.decoded, vec![vec![0]]);
        let ex = run_fig1(1, 1, &[]);
        assert_eq!(flat(&ex), vec![1, 0, 1, 0]);
        assert_eq!(ex.decoded, vec![vec![1]]);
    }

    #[test]
    fn fig1_modifications() {
        assert_eq!(run_fig1(1, 0, &[(3, 0)]).decoded, vec![vec![1]]);
        assert_eq!(run_fig1(1, 0, &[(3, 0), (4, 0)]).decoded, vec![vec![0]]);
        // Flipping Y1 on the wire changes what the relay computes.
        let ex = run_fig1(1, 0, &[(1, 1)]);
        assert_eq!(flat(&ex), vec![1, 1, 0, 0]);
    }

    #[test]
    fn relay_builder_examples() {
        let one = build_relay(1, &[3], &[1], 5, &[0]).unwrap();
        assert_eq!(one.edge_count(), 3);
        assert_eq!(one.tapped, vec![vec![vec![1], vec![2], vec![3]]]);
        assert_eq!(one.alphabet, Alphabet::Field { p: 5, m: 1 });
        let two = build_relay(2, &[2, 2], &[1, 1], 2, &[0, 0]).unwrap();
        assert_eq!(two.edge_count(), 4);
        assert_eq!(two.attack_family().unwrap(), vec![vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4]]);
        assert!(matches!(build_relay(1, &[2], &[3], 2, &[0]), Err(NetError::BadParams(_))));
    }

    #[test]
    fn multicast_builder_examples() {
        let net = build_multicast(1, 2, 2, &[2], &[2, 1], &[1, 1], 2).unwrap();
        assert_eq!(net.edge_count(), 8);
        // Layer 1: two nodes with 2 incoming edges each, one tapped per node.
        assert_eq!(net.tapped[0].len(), 4);
        assert_eq!(net.zeta(), 4);
        let degenerate = build_multicast(1, 1, 1, &[], &[3], &[1], 2).unwrap();
        let relay = build_relay(1, &[3], &[1], 2, &[0]).unwrap();
        assert_eq!(degenerate, relay);
        assert!(matches!(
            build_multicast(1, 2, 2, &[2], &[2, 1], &[1, 3], 2),
            Err(NetError::BadParams(_))
        ));
    }

    #[test]
    fn mincut_examples() {
        let (spec, _) = build_fixture("five_node").unwrap();
        assert_eq!(spec.pseudo_sources(), vec![4]);
        assert_eq!(mincuts(&spec).unwrap(), (2, 1));
        let relay = build_relay(2, &[2, 3], &[0, 0], 2, &[0, 0]).unwrap();
        assert_eq!(mincuts(&relay).unwrap(), (2, 2));
        let single = build_relay(1, &[1], &[0], 2, &[0]).unwrap();
        assert_eq!(mincuts(&single).unwrap(), (1, 1));
        let mc = build_multicast(1, 2, 1, &[], &[1], &[0], 2).unwrap();
        assert_eq!(mincuts(&mc), Err(NetError::NotUnicast));
    }

    #[test]
    fn unknown_fixture() {
        assert_eq!(build_fixture("nope").unwrap_err(), NetError::UnknownFixture("nope".into()));
    }

    #[test]
    fn json_round_trips() {
        for name in FIXTURES {
            let (spec, code) = build_fixture(name).unwrap();
            let spec2 = NetworkSpec::from_json(&spec.to_json().to_string()).unwrap();
            assert_eq!(spec, spec2);
            let code2 = NetworkCode::from_json(&code.to_json().to_string()).unwrap();
            assert_eq!(code, code2);
        }
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power_decomposition(8), Some((2, 3)));
        assert_eq!(prime_power_decomposition(7), Some((7, 1)));
        assert_eq!(prime_power_decomposition(6), None);
        assert_eq!(prime_power_decomposition(1), None);
        assert_eq!(prime_power_decomposition(49), Some((7, 2)));
        assert_eq!(Alphabet::Plain { d: 6 }.linear_subalphabet(), 5);
    }
}
