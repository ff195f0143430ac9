// SPDX-License-Identifier: Apache-2.0

//! Exhaustive path listing for small graphs.
//!
//! Enumerates every walk of length `1..=m_max` touching the target and then
//! filters by scheme. Shortest distances come from the enumeration itself, not
//! from a BFS, so this stays independent of [`super::decompose`].

use std::collections::BTreeMap;

use super::{LevelDecomposition, LevelMultiset, Multiplicity, PathError, PathScheme};
use crate::graph::{Direction, HarmGraph, NodeId};

/// Default node cap for [`enumerate_paths`].
pub const DEFAULT_NODE_CAP: usize = 12;

/// An explicit path, listed in edge direction (first node supplies the next).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExplicitPath {
    pub nodes: Vec<NodeId>,
    direction: Direction,
}

impl ExplicitPath {
    /// Number of edges.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() < 2
    }

    /// The end of the path away from the target.
    pub fn far_end(&self) -> NodeId {
        match self.direction {
            Direction::Upstream => self.nodes[0],
            Direction::Downstream => *self.nodes.last().unwrap(),
        }
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

pub fn enumerate_paths(
    g: &HarmGraph,
    target: NodeId,
    dir: Direction,
    scheme: PathScheme,
    m_max: usize,
) -> Result<Vec<ExplicitPath>, PathError> {
    enumerate_paths_capped(g, target, dir, scheme, m_max, DEFAULT_NODE_CAP)
}

pub fn enumerate_paths_capped(
    g: &HarmGraph,
    target: NodeId,
    dir: Direction,
    scheme: PathScheme,
    m_max: usize,
    node_cap: usize,
) -> Result<Vec<ExplicitPath>, PathError> {
    if g.node_count() > node_cap {
        return Err(PathError::GraphTooLarge {
            nodes: g.node_count(),
            cap: node_cap,
        });
    }
    if !g.contains(target) {
        return Err(PathError::UnknownNode(target));
    }
    if m_max == 0 {
        return Err(PathError::InvalidMMax(0));
    }

    // All walks, built outward from the target one edge at a time.
    let mut walks: Vec<Vec<NodeId>> = Vec::new();
    let mut frontier: Vec<Vec<NodeId>> = vec![vec![target]];
    for _ in 0..m_max {
        let mut grown = Vec::new();
        for w in &frontier {
            let end = *w.last().unwrap();
            let nbrs = match dir {
                Direction::Upstream => g.in_neighbors(end).unwrap(),
                Direction::Downstream => g.out_neighbors(end).unwrap(),
            };
            for &u in nbrs {
                let mut next = w.clone();
                next.push(u);
                grown.push(next);
            }
        }
        walks.extend(grown.iter().cloned());
        frontier = grown;
    }

    let mut paths: Vec<ExplicitPath> = walks
        .into_iter()
        .map(|mut w| {
            if dir == Direction::Upstream {
                w.reverse();
            }
            ExplicitPath {
                nodes: w,
                direction: dir,
            }
        })
        .filter(|p| p.far_end() != target)
        .collect();

    let shortest: BTreeMap<NodeId, usize> = paths.iter().fold(BTreeMap::new(), |mut acc, p| {
        let e = acc.entry(p.far_end()).or_insert(usize::MAX);
        *e = (*e).min(p.len());
        acc
    });

    match scheme {
        PathScheme::AllPaths => {}
        PathScheme::SimplePaths => paths.retain(ExplicitPath::is_simple),
        PathScheme::AllShortestPaths => paths.retain(|p| p.len() == shortest[&p.far_end()]),
        PathScheme::SingleShortestPath => {
            paths.retain(|p| p.len() == shortest[&p.far_end()]);
            paths.sort();
            let mut taken = std::collections::BTreeSet::new();
            paths.retain(|p| taken.insert(p.far_end()));
        }
    }
    paths.sort();
    Ok(paths)
}

/// Collapses explicit paths to per-level origin multisets.
pub fn collapse(
    paths: &[ExplicitPath],
    target: NodeId,
    dir: Direction,
    scheme: PathScheme,
    m_max: usize,
) -> LevelDecomposition {
    let mut levels: Vec<LevelMultiset> = (1..=m_max)
        .map(|level| LevelMultiset {
            level,
            entries: BTreeMap::new(),
        })
        .collect();
    for p in paths {
        *levels[p.len() - 1].entries.entry(p.far_end()).or_insert(0) += 1 as Multiplicity;
    }
    LevelDecomposition {
        target,
        direction: dir,
        scheme,
        m_max,
        levels,
    }
}
