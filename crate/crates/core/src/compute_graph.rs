//! Receiver computation DAGs. The compute supply of a graph is the minimum
//! over s-t cuts of the crossing budget (gate budget times gate capacity,
//! plus any committed reliable bits), found by integer max-flow.
//!
//! Budgets are scaled to micro-units (1e-6 bits/instance, round-half-even)
//! so the flow solver works on exact integers and the witness cut is
//! deterministic. The witness is the residual source side, the canonical
//! minimum cut nearest the source.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{LimitsError, Result};

const MICRO: f64 = 1e6;
const MICRO_CAP: f64 = 1e15;

/// Raw graph description as loaded from JSON. Validation produces a
/// [`ComputationGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub nodes: Vec<String>,
    pub source: String,
    pub sink: String,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub tail: String,
    pub head: String,
    pub m: f64,
    #[serde(default)]
    pub b: f64,
}

impl EdgeSpec {
    pub fn new(tail: &str, head: &str, m: f64, b: f64) -> Self {
        EdgeSpec { tail: tail.into(), head: head.into(), m, b }
    }
}

/// Validated DAG: acyclic, every node on a source-to-sink path, parallel
/// duplicate edges merged by budget summation. Immutable afterwards.
#[derive(Debug, Clone)]
pub struct ComputationGraph {
    labels: Vec<String>,
    source: usize,
    sink: usize,
    edges: Vec<MergedEdge>,
    ends: Vec<(usize, usize)>,
    topo: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedEdge {
    pub tail: String,
    pub head: String,
    pub m: f64,
    pub b: f64,
}

/// Minimum cut with its witness. `flow_value` is the max-flow certificate;
/// duality makes it equal `cut_value`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub cut_value: f64,
    pub flow_value: f64,
    pub cut_edges: Vec<(String, String)>,
    pub partition: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedSupply {
    pub supply: f64,
    pub binding: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBudget {
    pub tail: String,
    pub head: String,
    pub m: f64,
}

/// Max-min allocation outcome. `heuristic` marks the uniform fallback on
/// graphs outside the series-parallel class; its min-cut is still a genuine
/// achievable lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub budgets: Vec<EdgeBudget>,
    pub min_cut: f64,
    pub heuristic: bool,
}

impl GraphSpec {
    pub fn validate(self) -> Result<ComputationGraph> {
        let n = self.nodes.len();
        let mut index: HashMap<&str, usize> = HashMap::with_capacity(n);
        for (i, label) in self.nodes.iter().enumerate() {
            if index.insert(label.as_str(), i).is_some() {
                return Err(LimitsError::Graph(format!("duplicate node label {label}")));
            }
        }
        let source = *index
            .get(self.source.as_str())
            .ok_or_else(|| LimitsError::Graph(format!("source {} not in node set", self.source)))?;
        let sink = *index
            .get(self.sink.as_str())
            .ok_or_else(|| LimitsError::Graph(format!("sink {} not in node set", self.sink)))?;
        if source == sink {
            return Err(LimitsError::Graph("source and sink must differ".into()));
        }

        let mut ends = Vec::new();
        let mut merged: Vec<(f64, f64)> = Vec::new();
        let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.edges {
            let a = *index
                .get(e.tail.as_str())
                .ok_or_else(|| LimitsError::Graph(format!("edge tail {} not in node set", e.tail)))?;
            let b = *index
                .get(e.head.as_str())
                .ok_or_else(|| LimitsError::Graph(format!("edge head {} not in node set", e.head)))?;
            if !e.m.is_finite() || e.m < 0.0 || !e.b.is_finite() || e.b < 0.0 {
                return Err(LimitsError::Domain(format!(
                    "edge {} -> {} has non-finite or negative budgets",
                    e.tail, e.head
                )));
            }
            if a == b {
                return Err(LimitsError::Graph(format!("cycle: {} -> {}", e.tail, e.head)));
            }
            match slot.get(&(a, b)) {
                Some(&i) => {
                    merged[i].0 += e.m;
                    merged[i].1 += e.b;
                }
                None => {
                    slot.insert((a, b), merged.len());
                    ends.push((a, b));
                    merged.push((e.m, e.b));
                }
            }
        }

        if ends.iter().any(|&(_, b)| b == source) {
            return Err(LimitsError::Graph(format!("source {} has an incoming edge", self.source)));
        }
        if ends.iter().any(|&(a, _)| a == sink) {
            return Err(LimitsError::Graph(format!("sink {} has an outgoing edge", self.sink)));
        }

        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(a, b) in &ends {
            out[a].push(b);
            indeg[b] += 1;
        }

        // Kahn's algorithm; leftovers contain a cycle we can walk out
        let mut remaining = indeg.clone();
        let topo = kahn_order(&out, &indeg, &mut remaining);
        if topo.len() < n {
            let start = (0..n).find(|&v| remaining[v] > 0).unwrap();
            let mut seen = vec![false; n];
            let mut path = vec![start];
            seen[start] = true;
            let mut cur = start;
            loop {
                let next = *out[cur]
                    .iter()
                    .find(|&&w| remaining[w] > 0)
                    .expect("cyclic node keeps a cyclic successor");
                if seen[next] {
                    let pos = path.iter().position(|&v| v == next).unwrap();
                    let names: Vec<&str> =
                        path[pos..].iter().map(|&v| self.nodes[v].as_str()).collect();
                    return Err(LimitsError::Graph(format!(
                        "cycle: {} -> {}",
                        names.join(" -> "),
                        self.nodes[next]
                    )));
                }
                seen[next] = true;
                path.push(next);
                cur = next;
            }
        }
        // every node must see the source behind it and the sink ahead
        let fwd = reach(&out, source);
        let mut rin: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &ends {
            rin[b].push(a);
        }
        let bwd = reach(&rin, sink);
        for v in 0..n {
            if !(fwd[v] && bwd[v]) {
                return Err(LimitsError::Graph(format!(
                    "node {} lies on no source-to-sink path",
                    self.nodes[v]
                )));
            }
        }

        let edges = ends
            .iter()
            .zip(&merged)
            .map(|(&(a, b), &(m, rel))| MergedEdge {
                tail: self.nodes[a].clone(),
                head: self.nodes[b].clone(),
                m,
                b: rel,
            })
            .collect();
        Ok(ComputationGraph { labels: self.nodes, source, sink, edges, ends, topo })
    }
}

/// Smallest-index-first Kahn order. `remaining` is left holding the indegree
/// of any nodes stuck on a cycle.
fn kahn_order(out: &[Vec<usize>], indeg: &[usize], remaining: &mut [usize]) -> Vec<usize> {
    let n = out.len();
    remaining.copy_from_slice(indeg);
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&v| remaining[v] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &out[v] {
            remaining[w] -= 1;
            if remaining[w] == 0 {
                ready.push(std::cmp::Reverse(w));
            }
        }
    }
    order
}

fn reach(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

impl ComputationGraph {
    pub fn nodes(&self) -> &[String] {
        &self.labels
    }

    pub fn source(&self) -> &str {
        &self.labels[self.source]
    }

    pub fn sink(&self) -> &str {
        &self.labels[self.sink]
    }

    pub fn edges(&self) -> &[MergedEdge] {
        &self.edges
    }
}

fn to_micro(w: f64) -> Result<u64> {
    let scaled = (w * MICRO).round_ties_even();
    if w > 0.0 && scaled == 0.0 {
        return Err(LimitsError::Unsupported(format!(
            "budget {w} is below the 1e-6 bits/instance micro-unit resolution"
        )));
    }
    if scaled > MICRO_CAP {
        return Err(LimitsError::Unsupported(format!(
            "budget {w} exceeds the micro-unit range"
        )));
    }
    Ok(scaled as u64)
}

/// Edmonds-Karp on integer capacities. Edge i and i^1 are a residual pair.
struct FlowNet {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet { adj: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add_edge(&mut self, a: usize, b: usize, c: u64) {
        self.adj[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.adj[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let n = self.adj.len();
        let mut total = 0u64;
        loop {
            let mut pre: Vec<Option<usize>> = vec![None; n];
            let mut q = std::collections::VecDeque::from([s]);
            let mut seen = vec![false; n];
            seen[s] = true;
            'bfs: while let Some(v) = q.pop_front() {
                for &e in &self.adj[v] {
                    let w = self.to[e];
                    if !seen[w] && self.cap[e] > 0 {
                        seen[w] = true;
                        pre[w] = Some(e);
                        if w == t {
                            break 'bfs;
                        }
                        q.push_back(w);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck = u64::MAX;
            let mut v = t;
            while v != s {
                let e = pre[v].unwrap();
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = pre[v].unwrap();
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            total += bottleneck;
        }
    }

    fn residual_source_side(&self, s: usize) -> Vec<bool> {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.adj[v] {
                let w = self.to[e];
                if !seen[w] && self.cap[e] > 0 {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

fn min_cut_weighted(g: &ComputationGraph, weights: &[f64]) -> Result<CutResult> {
    let mut net = FlowNet::new(g.labels.len());
    let mut micro = Vec::with_capacity(weights.len());
    for (&(a, b), &w) in g.ends.iter().zip(weights) {
        let c = to_micro(w)?;
        micro.push(c);
        net.add_edge(a, b, c);
    }
    let flow = net.max_flow(g.source, g.sink);
    let omega = net.residual_source_side(g.source);

    let mut cut_edges = Vec::new();
    let mut cut_micro = 0u64;
    for (i, &(a, b)) in g.ends.iter().enumerate() {
        if omega[a] && !omega[b] {
            cut_edges.push((g.edges[i].tail.clone(), g.edges[i].head.clone()));
            cut_micro += micro[i];
        }
    }
    let partition = (0..g.labels.len())
        .filter(|&v| omega[v])
        .map(|v| g.labels[v].clone())
        .collect();
    Ok(CutResult {
        cut_value: cut_micro as f64 / MICRO,
        flow_value: flow as f64 / MICRO,
        cut_edges,
        partition,
    })
}

/// Minimum over s-t cuts of sum(m_e c_gate + b_e).
pub fn min_cut_supply(g: &ComputationGraph, c_gate: f64) -> Result<CutResult> {
    if !c_gate.is_finite() || c_gate < 0.0 {
        return Err(LimitsError::Domain(format!(
            "c_gate must be finite and nonnegative, got {c_gate}"
        )));
    }
    let weights: Vec<f64> = g.edges.iter().map(|e| e.m * c_gate + e.b).collect();
    min_cut_weighted(g, &weights)
}

/// Channel cut against the compute min-cut; ties report "channel".
pub fn combined_supply(g: &ComputationGraph, c_gate: f64, n: f64, c_ch: f64) -> Result<CombinedSupply> {
    if !n.is_finite() || n < 0.0 || !c_ch.is_finite() || c_ch < 0.0 {
        return Err(LimitsError::Domain(
            "channel budget and capacity must be finite and nonnegative".into(),
        ));
    }
    let channel = n * c_ch;
    let compute = min_cut_supply(g, c_gate)?.cut_value;
    if channel <= compute {
        Ok(CombinedSupply { supply: channel, binding: "channel".into() })
    } else {
        Ok(CombinedSupply { supply: compute, binding: "compute".into() })
    }
}

/// Series-parallel allocation tree over merged-edge indices.
enum SpNode {
    Leaf(usize),
    Series(Vec<SpNode>),
    Parallel(Vec<SpNode>),
}

impl SpNode {
    /// Min-cut value gained per unit of budget under optimal allocation.
    fn alpha(&self) -> f64 {
        match self {
            SpNode::Leaf(_) => 1.0,
            SpNode::Series(ch) => 1.0 / ch.iter().map(|c| 1.0 / c.alpha()).sum::<f64>(),
            SpNode::Parallel(ch) => ch.iter().map(SpNode::alpha).fold(0.0, f64::max),
        }
    }

    /// Distribute budget so this subtree's min cut reaches `value`.
    fn assign(&self, value: f64, out: &mut [f64]) {
        match self {
            SpNode::Leaf(e) => out[*e] = value,
            SpNode::Series(ch) => {
                for c in ch {
                    c.assign(value, out);
                }
            }
            SpNode::Parallel(ch) => {
                let amax = ch.iter().map(SpNode::alpha).fold(0.0, f64::max);
                let tied: Vec<&SpNode> =
                    ch.iter().filter(|c| c.alpha() >= amax * (1.0 - 1e-12)).collect();
                let share = value / tied.len() as f64;
                for c in ch {
                    if c.alpha() >= amax * (1.0 - 1e-12) {
                        c.assign(share, out);
                    } else {
                        c.assign(0.0, out);
                    }
                }
                debug_assert!(!tied.is_empty());
            }
        }
    }
}

/// Reduce the multigraph by series/parallel contractions; a single surviving
/// s-t edge proves the graph series-parallel and carries the allocation tree.
fn sp_decompose(g: &ComputationGraph) -> Option<SpNode> {
    let n = g.labels.len();
    let mut work: Vec<(usize, usize, SpNode)> = g
        .ends
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (a, b, SpNode::Leaf(i)))
        .collect();
    loop {
        let mut changed = false;

        // parallel pass: merge same-endpoint edges preserving first position
        let mut i = 0;
        while i < work.len() {
            let key = (work[i].0, work[i].1);
            let mut extras = Vec::new();
            let mut j = i + 1;
            while j < work.len() {
                if (work[j].0, work[j].1) == key {
                    extras.push(work.remove(j).2);
                } else {
                    j += 1;
                }
            }
            if !extras.is_empty() {
                let first = std::mem::replace(&mut work[i].2, SpNode::Leaf(usize::MAX));
                let mut children = vec![first];
                children.extend(extras);
                work[i].2 = SpNode::Parallel(children);
                changed = true;
            }
            i += 1;
        }

        // series pass: contract internal nodes with one edge in, one out
        for v in 0..n {
            if v == g.source || v == g.sink {
                continue;
            }
            let ins: Vec<usize> = (0..work.len()).filter(|&e| work[e].1 == v).collect();
            let outs: Vec<usize> = (0..work.len()).filter(|&e| work[e].0 == v).collect();
            if ins.len() == 1 && outs.len() == 1 {
                let (ei, eo) = (ins[0], outs[0]);
                let (hi, lo) = (ei.max(eo), ei.min(eo));
                let second = work.remove(hi);
                let first = work.remove(lo);
                let (a, node_in, node_out, b) = if first.1 == v {
                    (first.0, first.2, second.2, second.1)
                } else {
                    (second.0, second.2, first.2, first.1)
                };
                work.push((a, b, SpNode::Series(vec![node_in, node_out])));
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }
    if work.len() == 1 && work[0].0 == g.source && work[0].1 == g.sink {
        Some(work.pop().unwrap().2)
    } else {
        None
    }
}

/// True when the merged graph is a single path plus one source-to-sink skip.
fn chain_skip_edges(g: &ComputationGraph) -> Option<(Vec<usize>, usize)> {
    let n = g.labels.len();
    if n < 3 || g.ends.len() != n {
        return None;
    }
    let mut chain = Vec::with_capacity(n - 1);
    for w in g.topo.windows(2) {
        chain.push(g.ends.iter().position(|&(a, b)| (a, b) == (w[0], w[1]))?);
    }
    let skip = g.ends.iter().position(|&(a, b)| (a, b) == (g.source, g.sink))?;
    if chain.contains(&skip) {
        return None;
    }
    Some((chain, skip))
}

/// Spread `total_budget` over the topology's edges to maximize the min cut
/// (budget units; gate capacity multiplies out of the objective). Exact on
/// series-parallel graphs, uniform with `heuristic = true` elsewhere. With
/// `rho_skip` given, the graph must be a chain plus skip and the split is
/// the parametric one: skip gets (1 - rho) of the mass, the chain shares rho.
pub fn allocate_maxmin(
    g: &ComputationGraph,
    total_budget: f64,
    rho_skip: Option<f64>,
) -> Result<AllocationResult> {
    if !total_budget.is_finite() || total_budget < 0.0 {
        return Err(LimitsError::Domain(format!(
            "total budget must be finite and nonnegative, got {total_budget}"
        )));
    }
    let mut budgets = vec![0.0; g.ends.len()];
    let heuristic;
    if let Some(rho) = rho_skip {
        if !(0.0..=1.0).contains(&rho) {
            return Err(LimitsError::Domain(format!("rho_skip must lie in [0, 1], got {rho}")));
        }
        let (chain, skip) = chain_skip_edges(g).ok_or_else(|| {
            LimitsError::InvalidSpec(
                "rho_skip applies only to a chain-plus-skip topology".into(),
            )
        })?;
        let k = chain.len() as f64;
        for e in chain {
            budgets[e] = rho * total_budget / k;
        }
        budgets[skip] = (1.0 - rho) * total_budget;
        heuristic = false;
    } else if let Some(tree) = sp_decompose(g) {
        tree.assign(tree.alpha() * total_budget, &mut budgets);
        heuristic = false;
    } else {
        let share = total_budget / g.ends.len() as f64;
        budgets.iter_mut().for_each(|b| *b = share);
        heuristic = true;
    }

    let min_cut = min_cut_weighted(g, &budgets)?.cut_value;
    let budgets = g
        .edges
        .iter()
        .zip(&budgets)
        .map(|(e, &m)| EdgeBudget { tail: e.tail.clone(), head: e.head.clone(), m })
        .collect();
    Ok(AllocationResult { budgets, min_cut, heuristic })
}
