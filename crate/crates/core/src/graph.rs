// SPDX-License-Identifier: Apache-2.0

//! Node-valued directed graph storage.
//!
//! An edge `(u, v)` means "u supplies v". Adjacency is kept in both
//! directions so that upstream (supplier) and downstream (customer)
//! traversals are equally cheap.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node handle, `0..n` in input order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Harm value in `[0, 100]`; 0 is a perfect rating, 100 the worst.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HarmScore(f64);

impl HarmScore {
    pub const MIN: HarmScore = HarmScore(0.0);
    pub const MAX: HarmScore = HarmScore(100.0);

    pub fn new(value: f64) -> Result<Self, GraphError> {
        if value.is_finite() && (0.0..=100.0).contains(&value) {
            Ok(HarmScore(value))
        } else {
            Err(GraphError::HarmOutOfRange {
                label: String::new(),
                value,
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HarmScore {
    type Error = GraphError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        HarmScore::new(v)
    }
}

impl From<HarmScore> for f64 {
    fn from(h: HarmScore) -> f64 {
        h.0
    }
}

/// Which way harm is collected relative to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Paths ending at the target (its suppliers, their suppliers, ...).
    #[default]
    Upstream,
    /// Paths starting at the target (its customers, ...).
    Downstream,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Upstream => "upstream",
            Direction::Downstream => "downstream",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "upstream" | "up" | "in" => Ok(Direction::Upstream),
            "downstream" | "down" | "out" => Ok(Direction::Downstream),
            other => Err(format!(
                "unknown direction `{other}` (expected upstream or downstream)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("duplicate node label `{0}`")]
    DuplicateNode(String),
    #[error("edge endpoint `{0}` is not a node")]
    UnknownEndpoint(String),
    #[error("harm {value} for node `{label}` is outside [0, 100]")]
    HarmOutOfRange { label: String, value: f64 },
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("graph has no nodes")]
    EmptyGraph,
}

/// Directed graph with one harm score per node. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmGraph {
    labels: Vec<String>,
    names: Vec<Option<String>>,
    harms: Vec<f64>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    index: HashMap<String, NodeId>,
    edge_count: usize,
}

/// One node row for [`HarmGraph::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub label: String,
    pub harm: f64,
    pub name: Option<String>,
}

impl NodeSpec {
    pub fn new(label: impl Into<String>, harm: f64) -> Self {
        NodeSpec {
            label: label.into(),
            harm,
            name: None,
        }
    }
}

impl<S: Into<String>> From<(S, f64)> for NodeSpec {
    fn from((label, harm): (S, f64)) -> Self {
        NodeSpec::new(label, harm)
    }
}

impl HarmGraph {
    /// Builds a graph from labelled nodes and label-pair edges. Ids follow
    /// node input order; duplicate edges collapse to one.
    pub fn build<N, E, S>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator,
        N::Item: Into<NodeSpec>,
        E: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut labels = Vec::new();
        let mut names = Vec::new();
        let mut harms = Vec::new();
        let mut index = HashMap::new();
        for spec in nodes {
            let spec: NodeSpec = spec.into();
            if !(spec.harm.is_finite() && (0.0..=100.0).contains(&spec.harm)) {
                return Err(GraphError::HarmOutOfRange {
                    label: spec.label,
                    value: spec.harm,
                });
            }
            let id = NodeId::from(labels.len());
            if index.insert(spec.label.clone(), id).is_some() {
                return Err(GraphError::DuplicateNode(spec.label));
            }
            labels.push(spec.label);
            names.push(spec.name);
            harms.push(spec.harm);
        }

        let mut pairs = BTreeSet::new();
        for (src, dst) in edges {
            let (src, dst) = (src.as_ref(), dst.as_ref());
            let s = *index
                .get(src)
                .ok_or_else(|| GraphError::UnknownEndpoint(src.to_string()))?;
            let d = *index
                .get(dst)
                .ok_or_else(|| GraphError::UnknownEndpoint(dst.to_string()))?;
            if s == d {
                return Err(GraphError::SelfLoop(src.to_string()));
            }
            pairs.insert((s, d));
        }
        Ok(Self::from_parts(labels, names, harms, index, pairs))
    }

    fn from_parts(
        labels: Vec<String>,
        names: Vec<Option<String>>,
        harms: Vec<f64>,
        index: HashMap<String, NodeId>,
        pairs: BTreeSet<(NodeId, NodeId)>,
    ) -> Self {
        let n = labels.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(s, d) in &pairs {
            out_adj[s.index()].push(d);
            in_adj[d.index()].push(s);
        }
        for list in in_adj.iter_mut() {
            list.sort_unstable();
        }
        HarmGraph {
            labels,
            names,
            harms,
            out_adj,
            in_adj,
            index,
            edge_count: pairs.len(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + Clone {
        (0..self.labels.len()).map(NodeId::from)
    }

    /// All edges `(src, dst)` in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(s, outs)| outs.iter().map(move |&d| (NodeId::from(s), d)))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.labels.len()
    }

    pub fn check(&self, id: NodeId) -> Result<(), GraphError> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(id.to_string()))
        }
    }

    pub fn node(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<NodeId, GraphError> {
        self.node(label)
            .ok_or_else(|| GraphError::UnknownNode(label.to_string()))
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id.index()]
    }

    pub fn name(&self, id: NodeId) -> Option<&str> {
        self.names[id.index()].as_deref()
    }

    pub fn harm(&self, id: NodeId) -> f64 {
        self.harms[id.index()]
    }

    pub fn harms(&self) -> &[f64] {
        &self.harms
    }

    /// Direct suppliers of `a`, ascending by id.
    pub fn in_neighbors(&self, a: NodeId) -> Result<&[NodeId], GraphError> {
        self.check(a)?;
        Ok(&self.in_adj[a.index()])
    }

    /// Direct customers of `a`, ascending by id.
    pub fn out_neighbors(&self, a: NodeId) -> Result<&[NodeId], GraphError> {
        self.check(a)?;
        Ok(&self.out_adj[a.index()])
    }

    /// Neighbors one step further from the target in direction `dir`:
    /// suppliers for upstream, customers for downstream. Unchecked.
    #[inline]
    pub(crate) fn away(&self, a: NodeId, dir: Direction) -> &[NodeId] {
        match dir {
            Direction::Upstream => &self.in_adj[a.index()],
            Direction::Downstream => &self.out_adj[a.index()],
        }
    }

    pub fn in_degree(&self, a: NodeId) -> usize {
        self.in_adj[a.index()].len()
    }

    pub fn out_degree(&self, a: NodeId) -> usize {
        self.out_adj[a.index()].len()
    }

    /// Same structure with some harms replaced.
    pub fn with_harms<I>(&self, overrides: I) -> Result<HarmGraph, GraphError>
    where
        I: IntoIterator<Item = (NodeId, f64)>,
    {
        let mut g = self.clone();
        for (id, h) in overrides {
            self.check(id)?;
            if !(h.is_finite() && (0.0..=100.0).contains(&h)) {
                return Err(GraphError::HarmOutOfRange {
                    label: self.label(id).to_string(),
                    value: h,
                });
            }
            g.harms[id.index()] = h;
        }
        Ok(g)
    }

    /// Induced subgraph on `keep`, preserving relative input order.
    /// Ids are re-densified.
    pub fn induced(&self, keep: &[bool]) -> HarmGraph {
        let mut remap = vec![None; self.node_count()];
        let mut labels = Vec::new();
        let mut names = Vec::new();
        let mut harms = Vec::new();
        let mut index = HashMap::new();
        for v in self.nodes().filter(|v| keep[v.index()]) {
            let id = NodeId::from(labels.len());
            remap[v.index()] = Some(id);
            index.insert(self.labels[v.index()].clone(), id);
            labels.push(self.labels[v.index()].clone());
            names.push(self.names[v.index()].clone());
            harms.push(self.harms[v.index()]);
        }
        let pairs = self
            .edges()
            .filter_map(|(s, d)| Some((remap[s.index()]?, remap[d.index()]?)))
            .collect();
        Self::from_parts(labels, names, harms, index, pairs)
    }

    /// The graph with the given nodes and all their incident edges deleted.
    pub fn without_nodes(&self, removed: &[NodeId]) -> HarmGraph {
        let mut keep = vec![true; self.node_count()];
        for r in removed {
            keep[r.index()] = false;
        }
        self.induced(&keep)
    }

    /// Maximal subgraph whose undirected projection has minimum degree `k`.
    /// Degrees count distinct neighbors, so a reciprocal pair counts once.
    pub fn k_core(&self, k: usize) -> HarmGraph {
        let n = self.node_count();
        let neighbors: Vec<Vec<NodeId>> = self
            .nodes()
            .map(|v| {
                let mut nb: Vec<NodeId> = self.in_adj[v.index()]
                    .iter()
                    .chain(&self.out_adj[v.index()])
                    .copied()
                    .collect();
                nb.sort_unstable();
                nb.dedup();
                nb
            })
            .collect();
        let mut degree: Vec<usize> = neighbors.iter().map(Vec::len).collect();
        let mut alive = vec![true; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] < k).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for u in &neighbors[v] {
                let u = u.index();
                if alive[u] {
                    degree[u] -= 1;
                    if degree[u] + 1 == k {
                        queue.push_back(u);
                    }
                }
            }
        }
        self.induced(&alive)
    }

    /// Merges nodes according to `aliases` (member label -> canonical label).
    /// The merged node keeps the canonical node's harm if present, otherwise
    /// the maximum harm among members. Edges are unioned; edges that become
    /// self-loops are dropped.
    pub fn merge_aliases(&self, aliases: &HashMap<String, String>) -> HarmGraph {
        let canon = |l: &str| aliases.get(l).map(String::as_str).unwrap_or(l).to_string();
        let mut order: Vec<String> = Vec::new();
        let mut harm: HashMap<String, f64> = HashMap::new();
        let mut exact: HashMap<String, f64> = HashMap::new();
        let mut name: HashMap<String, Option<String>> = HashMap::new();
        for v in self.nodes() {
            let l = self.label(v);
            let c = canon(l);
            if !harm.contains_key(&c) {
                order.push(c.clone());
                name.insert(c.clone(), None);
            }
            let e = harm.entry(c.clone()).or_insert(0.0);
            *e = e.max(self.harm(v));
            if l == c {
                exact.insert(c.clone(), self.harm(v));
                name.insert(c.clone(), self.names[v.index()].clone());
            }
        }
        let nodes = order.iter().map(|c| NodeSpec {
            label: c.clone(),
            harm: exact.get(c).copied().unwrap_or(harm[c]),
            name: name[c].clone(),
        });
        let edges: Vec<(String, String)> = self
            .edges()
            .map(|(s, d)| (canon(self.label(s)), canon(self.label(d))))
            .filter(|(s, d)| s != d)
            .collect();
        HarmGraph::build(nodes, edges).expect("merge preserves graph invariants")
    }

    /// Largest finite shortest-path distance over all ordered pairs.
    pub fn diameter(&self) -> usize {
        let n = self.node_count();
        let mut best = 0;
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for w in &self.out_adj[v] {
                    if dist[w.index()] == usize::MAX {
                        dist[w.index()] = dist[v] + 1;
                        best = best.max(dist[w.index()]);
                        queue.push_back(w.index());
                    }
                }
            }
        }
        best
    }

    /// Largest adjacency eigenvalue modulus.
    ///
    /// The Perron root of a nonnegative matrix is the largest Perron root over
    /// its strongly connected components, so each nontrivial component is
    /// handled separately. On an irreducible block `B`, power iteration on
    /// `B + I` is aperiodic and the Collatz-Wielandt bounds
    /// `min (Bx)_i / x_i <= r <= max (Bx)_i / x_i` give a certified stopping
    /// rule.
    pub fn spectral_radius_estimate(&self) -> Result<SpectralEstimate, GraphError> {
        const REL_TOL: f64 = 1e-8;
        const MAX_ITER: usize = 10_000;

        if self.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut pg = petgraph::graph::DiGraph::<(), ()>::with_capacity(
            self.node_count(),
            self.edge_count(),
        );
        for _ in 0..self.node_count() {
            pg.add_node(());
        }
        for (s, d) in self.edges() {
            pg.add_edge(petgraph::graph::NodeIndex::new(s.index()), petgraph::graph::NodeIndex::new(d.index()), ());
        }

        let mut radius: f64 = 0.0;
        let mut converged = true;
        let mut member = vec![usize::MAX; self.node_count()];
        for comp in petgraph::algo::tarjan_scc(&pg) {
            if comp.len() < 2 {
                // No self-loops, so singletons contribute eigenvalue 0.
                continue;
            }
            let local: Vec<usize> = comp.iter().map(|i| i.index()).collect();
            for (k, &v) in local.iter().enumerate() {
                member[v] = k;
            }
            let block_in: Vec<Vec<usize>> = local
                .iter()
                .map(|&v| {
                    self.in_adj[v]
                        .iter()
                        .filter(|u| member[u.index()] != usize::MAX)
                        .map(|u| member[u.index()])
                        .collect()
                })
                .collect();

            let m = local.len();
            let mut x = vec![1.0; m];
            let mut y = vec![0.0; m];
            let mut ok = false;
            let mut estimate = 0.0;
            for _ in 0..MAX_ITER {
                for i in 0..m {
                    y[i] = x[i] + block_in[i].iter().map(|&j| x[j]).sum::<f64>();
                }
                let (lo, hi) = x.iter().zip(&y).fold((f64::MAX, 0.0f64), |(lo, hi), (xi, yi)| {
                    let r = yi / xi;
                    (lo.min(r), hi.max(r))
                });
                estimate = 0.5 * (lo + hi) - 1.0;
                if hi - lo <= REL_TOL * hi.max(1.0) * 0.5 {
                    ok = true;
                    break;
                }
                let norm = y.iter().cloned().fold(0.0, f64::max);
                for i in 0..m {
                    x[i] = y[i] / norm;
                }
            }
            for &v in &local {
                member[v] = usize::MAX;
            }
            if ok {
                radius = radius.max(estimate);
            } else {
                converged = false;
            }
        }

        if converged {
            Ok(SpectralEstimate {
                value: radius,
                approximate: false,
            })
        } else {
            let bound = self
                .nodes()
                .map(|v| self.in_degree(v).max(self.out_degree(v)))
                .max()
                .unwrap_or(0);
            Ok(SpectralEstimate {
                value: bound as f64,
                approximate: true,
            })
        }
    }
}

/// Result of [`HarmGraph::spectral_radius_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    /// Set when power iteration did not converge and `value` is the
    /// max-degree upper bound instead.
    pub approximate: bool,
}
