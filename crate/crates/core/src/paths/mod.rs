// SPDX-License-Identifier: Apache-2.0

//! Level decompositions: for a target node and a path-counting scheme, the
//! multiset of nodes that originate (upstream) or terminate (downstream)
//! qualifying paths of each length `m`.

pub mod oracle;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Direction, HarmGraph, NodeId};

/// Path counts can grow exponentially with length under [`PathScheme::AllPaths`].
pub type Multiplicity = u128;

/// Default cap on simple paths explored per decomposition.
pub const DEFAULT_SIMPLE_PATH_BUDGET: u64 = 10_000_000;

/// Hard ceiling on the number of levels a decomposition may carry.
pub const MAX_LEVELS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PathScheme {
    /// Every walk, loops included.
    #[serde(rename = "all")]
    AllPaths,
    /// Paths that never revisit a node.
    #[serde(rename = "simple")]
    SimplePaths,
    /// Every shortest path, one count per path.
    #[default]
    #[serde(rename = "shortest-all")]
    AllShortestPaths,
    /// Each node once, at its shortest distance.
    #[serde(rename = "shortest-one")]
    SingleShortestPath,
}

impl PathScheme {
    pub const ALL: [PathScheme; 4] = [
        PathScheme::AllPaths,
        PathScheme::SimplePaths,
        PathScheme::AllShortestPaths,
        PathScheme::SingleShortestPath,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PathScheme::AllPaths => "all",
            PathScheme::SimplePaths => "simple",
            PathScheme::AllShortestPaths => "shortest-all",
            PathScheme::SingleShortestPath => "shortest-one",
        }
    }
}

impl fmt::Display for PathScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PathScheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" | "walks" | "all-paths" => Ok(PathScheme::AllPaths),
            "simple" | "simple-paths" => Ok(PathScheme::SimplePaths),
            "shortest-all" | "shortest" | "all-shortest" => Ok(PathScheme::AllShortestPaths),
            "shortest-one" | "single-shortest" => Ok(PathScheme::SingleShortestPath),
            other => Err(format!(
                "unknown path scheme `{other}` (expected all, simple, shortest-all or shortest-one)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("target {0} is removed from the graph")]
    TargetRemoved(NodeId),
    #[error("m_max must be between 1 and {MAX_LEVELS}, got {0}")]
    InvalidMMax(usize),
    #[error("simple path budget of {budget} paths exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("path multiplicity overflowed at level {level}")]
    MultiplicityOverflow { level: usize },
    #[error("graph has {nodes} nodes, exhaustive enumeration is capped at {cap}")]
    GraphTooLarge { nodes: usize, cap: usize },
}

/// Origins (or endpoints) at one path length, with path multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LevelMultiset {
    pub level: usize,
    pub entries: BTreeMap<NodeId, Multiplicity>,
}

impl LevelMultiset {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of paths at this level.
    pub fn total(&self) -> Multiplicity {
        self.entries.values().fold(0, |a, &m| a.saturating_add(m))
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn multiplicity(&self, id: NodeId) -> Multiplicity {
        self.entries.get(&id).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDecomposition {
    pub target: NodeId,
    pub direction: Direction,
    pub scheme: PathScheme,
    pub m_max: usize,
    /// Entry `i` holds level `m = i + 1`; always exactly `m_max` entries.
    pub levels: Vec<LevelMultiset>,
}

impl LevelDecomposition {
    fn empty(target: NodeId, direction: Direction, scheme: PathScheme, m_max: usize) -> Self {
        LevelDecomposition {
            target,
            direction,
            scheme,
            m_max,
            levels: (1..=m_max)
                .map(|level| LevelMultiset {
                    level,
                    entries: BTreeMap::new(),
                })
                .collect(),
        }
    }

    pub fn level(&self, m: usize) -> &LevelMultiset {
        &self.levels[m - 1]
    }

    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(LevelMultiset::is_empty)
    }

    /// Deepest non-empty level, if any.
    pub fn depth(&self) -> Option<usize> {
        self.levels.iter().rposition(|l| !l.is_empty()).map(|i| i + 1)
    }

    /// Whether `id` appears at any level.
    pub fn contains(&self, id: NodeId) -> bool {
        self.levels.iter().any(|l| l.entries.contains_key(&id))
    }

    fn bump(&mut self, m: usize, id: NodeId, by: Multiplicity) -> Result<(), PathError> {
        let slot = self.levels[m - 1].entries.entry(id).or_insert(0);
        *slot = slot
            .checked_add(by)
            .ok_or(PathError::MultiplicityOverflow { level: m })?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecomposeOptions {
    /// Maximum number of simple paths explored before giving up.
    pub simple_path_budget: u64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            simple_path_budget: DEFAULT_SIMPLE_PATH_BUDGET,
        }
    }
}

/// Level decomposition of `target` on the whole graph.
pub fn decompose(
    g: &HarmGraph,
    target: NodeId,
    dir: Direction,
    scheme: PathScheme,
    m_max: usize,
) -> Result<LevelDecomposition, PathError> {
    decompose_with(g, target, dir, scheme, m_max, None, &DecomposeOptions::default())
}

/// Level decomposition treating nodes flagged in `removed` (indexed by id) as
/// deleted together with their incident edges.
pub fn decompose_with(
    g: &HarmGraph,
    target: NodeId,
    dir: Direction,
    scheme: PathScheme,
    m_max: usize,
    removed: Option<&[bool]>,
    opts: &DecomposeOptions,
) -> Result<LevelDecomposition, PathError> {
    if !g.contains(target) {
        return Err(PathError::UnknownNode(target));
    }
    if m_max == 0 || m_max > MAX_LEVELS {
        return Err(PathError::InvalidMMax(m_max));
    }
    let gone = |v: NodeId| removed.is_some_and(|r| r[v.index()]);
    if gone(target) {
        return Err(PathError::TargetRemoved(target));
    }
    let alive = g.node_count() - removed.map_or(0, |r| r.iter().filter(|&&x| x).count());
    // Loop-free schemes cannot produce paths longer than the live node count allows.
    let limit = m_max.min(alive.saturating_sub(1));

    let mut dec = LevelDecomposition::empty(target, dir, scheme, m_max);
    match scheme {
        PathScheme::AllPaths => walks(g, &mut dec, &gone)?,
        PathScheme::SimplePaths => simple_paths(g, &mut dec, limit, &gone, opts.simple_path_budget)?,
        PathScheme::AllShortestPaths | PathScheme::SingleShortestPath => {
            shortest_paths(g, &mut dec, limit, &gone)?
        }
    }
    Ok(dec)
}

/// Walk counts level by level: `counts[u]` after step `m` is the number of
/// length-`m` walks between `u` and the target. Walks may pass through the
/// target; only the target itself is dropped as an origin.
fn walks(
    g: &HarmGraph,
    dec: &mut LevelDecomposition,
    gone: &impl Fn(NodeId) -> bool,
) -> Result<(), PathError> {
    let n = g.node_count();
    let (target, dir) = (dec.target, dec.direction);
    let mut counts: Vec<Multiplicity> = vec![0; n];
    let mut next: Vec<Multiplicity> = vec![0; n];
    counts[target.index()] = 1;
    for m in 1..=dec.m_max {
        next.iter_mut().for_each(|c| *c = 0);
        let mut any = false;
        for v in g.nodes() {
            let c = counts[v.index()];
            if c == 0 {
                continue;
            }
            for &u in g.away(v, dir) {
                if gone(u) {
                    continue;
                }
                let slot = &mut next[u.index()];
                *slot = slot
                    .checked_add(c)
                    .ok_or(PathError::MultiplicityOverflow { level: m })?;
                any = true;
            }
        }
        if !any {
            break;
        }
        std::mem::swap(&mut counts, &mut next);
        for v in g.nodes() {
            let c = counts[v.index()];
            if c > 0 && v != target {
                dec.bump(m, v, c)?;
            }
        }
    }
    Ok(())
}

/// Depth-first enumeration with on-path marking. The target sits on the path
/// from the start, so it is never revisited or counted.
fn simple_paths(
    g: &HarmGraph,
    dec: &mut LevelDecomposition,
    limit: usize,
    gone: &impl Fn(NodeId) -> bool,
    budget: u64,
) -> Result<(), PathError> {
    if limit == 0 {
        return Ok(());
    }
    let dir = dec.direction;
    let mut on_path = vec![false; g.node_count()];
    let mut counts: Vec<BTreeMap<NodeId, u64>> = vec![BTreeMap::new(); limit];
    let mut explored: u64 = 0;

    // Stack of (node, index of next neighbor to try).
    let mut stack: Vec<(NodeId, usize)> = vec![(dec.target, 0)];
    on_path[dec.target.index()] = true;
    while let Some(top) = stack.last_mut() {
        let (v, cursor) = *top;
        let nbrs = g.away(v, dir);
        if cursor == nbrs.len() {
            on_path[v.index()] = false;
            stack.pop();
            continue;
        }
        top.1 += 1;
        let u = nbrs[cursor];
        if on_path[u.index()] || gone(u) {
            continue;
        }
        let depth = stack.len();
        explored += 1;
        if explored > budget {
            return Err(PathError::BudgetExceeded { budget });
        }
        *counts[depth - 1].entry(u).or_insert(0) += 1;
        if depth < limit {
            on_path[u.index()] = true;
            stack.push((u, 0));
        }
    }
    for (i, level) in counts.into_iter().enumerate() {
        for (id, c) in level {
            dec.bump(i + 1, id, c as Multiplicity)?;
        }
    }
    Ok(())
}

/// Breadth-first search from the target with shortest-path counting.
fn shortest_paths(
    g: &HarmGraph,
    dec: &mut LevelDecomposition,
    limit: usize,
    gone: &impl Fn(NodeId) -> bool,
) -> Result<(), PathError> {
    let n = g.node_count();
    let (target, dir) = (dec.target, dec.direction);
    let single = dec.scheme == PathScheme::SingleShortestPath;
    let mut dist = vec![usize::MAX; n];
    let mut sigma: Vec<Multiplicity> = vec![0; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([target]);
    dist[target.index()] = 0;
    sigma[target.index()] = 1;
    while let Some(v) = queue.pop_front() {
        let dv = dist[v.index()];
        if dv >= limit {
            continue;
        }
        for &u in g.away(v, dir) {
            if gone(u) {
                continue;
            }
            let du = &mut dist[u.index()];
            if *du == usize::MAX {
                *du = dv + 1;
                order.push(u);
                queue.push_back(u);
            }
            if dist[u.index()] == dv + 1 {
                sigma[u.index()] = sigma[u.index()]
                    .checked_add(sigma[v.index()])
                    .ok_or(PathError::MultiplicityOverflow { level: dv + 1 })?;
            }
        }
    }
    for u in order {
        let m = if single { 1 } else { sigma[u.index()] };
        dec.bump(dist[u.index()], u, m)?;
    }
    Ok(())
}
