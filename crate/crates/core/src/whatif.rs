// SPDX-License-Identifier: Apache-2.0

//! Counterfactual scoring: vulnerability, influence and global influence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, HarmGraph, NodeId};
use crate::metrics::{evaluate_scenario, HarmBreakdown, HarmConfig, MetricsError};
use crate::paths::DecomposeOptions;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WhatIfError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node {0} cannot be both the target and the queried node")]
    SelfQuery(NodeId),
    #[error("invalid overlay: {0}")]
    InvalidOverlay(String),
    #[error("conflicting overlay edit: {0}")]
    Conflict(String),
}

/// Harm overrides and node removals applied on top of a base graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOverlay {
    pub harm_overrides: BTreeMap<NodeId, f64>,
    pub removed_nodes: BTreeSet<NodeId>,
}

impl ScenarioOverlay {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.harm_overrides.is_empty() && self.removed_nodes.is_empty()
    }

    pub fn with_override(mut self, node: NodeId, harm: f64) -> Result<Self, WhatIfError> {
        self.set_override(node, harm)?;
        Ok(self)
    }

    pub fn with_removal(mut self, node: NodeId) -> Result<Self, WhatIfError> {
        self.remove(node)?;
        Ok(self)
    }

    pub fn set_override(&mut self, node: NodeId, harm: f64) -> Result<(), WhatIfError> {
        if self.removed_nodes.contains(&node) {
            return Err(WhatIfError::Conflict(format!("{node} is removed")));
        }
        if !(harm.is_finite() && (0.0..=100.0).contains(&harm)) {
            return Err(WhatIfError::InvalidOverlay(format!(
                "harm {harm} for {node} is outside [0, 100]"
            )));
        }
        self.harm_overrides.insert(node, harm);
        Ok(())
    }

    pub fn remove(&mut self, node: NodeId) -> Result<(), WhatIfError> {
        if self.harm_overrides.contains_key(&node) {
            return Err(WhatIfError::Conflict(format!("{node} has a harm override")));
        }
        self.removed_nodes.insert(node);
        Ok(())
    }

    pub fn clear_override(&mut self, node: NodeId) -> bool {
        self.harm_overrides.remove(&node).is_some()
    }

    pub fn restore(&mut self, node: NodeId) -> bool {
        self.removed_nodes.remove(&node)
    }

    pub fn validate(&self, g: &HarmGraph) -> Result<(), WhatIfError> {
        for (&id, &h) in &self.harm_overrides {
            if !g.contains(id) {
                return Err(WhatIfError::InvalidOverlay(format!("unknown node {id}")));
            }
            if !(h.is_finite() && (0.0..=100.0).contains(&h)) {
                return Err(WhatIfError::InvalidOverlay(format!(
                    "harm {h} for {id} is outside [0, 100]"
                )));
            }
            if self.removed_nodes.contains(&id) {
                return Err(WhatIfError::InvalidOverlay(format!(
                    "{id} is both overridden and removed"
                )));
            }
        }
        if let Some(id) = self.removed_nodes.iter().find(|id| !g.contains(**id)) {
            return Err(WhatIfError::InvalidOverlay(format!("unknown node {id}")));
        }
        Ok(())
    }

    fn materialize(&self, g: &HarmGraph) -> (Vec<f64>, Option<Vec<bool>>) {
        let mut harms = g.harms().to_vec();
        for (&id, &h) in &self.harm_overrides {
            harms[id.index()] = h;
        }
        let removed = (!self.removed_nodes.is_empty()).then(|| {
            let mut mask = vec![false; g.node_count()];
            for id in &self.removed_nodes {
                mask[id.index()] = true;
            }
            mask
        });
        (harms, removed)
    }
}

/// Network harm of `target` with `overlay` applied.
pub fn scored_breakdown(
    g: &HarmGraph,
    overlay: &ScenarioOverlay,
    target: NodeId,
    cfg: &HarmConfig,
) -> Result<HarmBreakdown, WhatIfError> {
    g.check(target)?;
    overlay.validate(g)?;
    if overlay.removed_nodes.contains(&target) {
        return Err(WhatIfError::InvalidOverlay(format!("target {target} is removed")));
    }
    let (harms, removed) = overlay.materialize(g);
    Ok(evaluate_scenario(
        g,
        &harms,
        removed.as_deref(),
        target,
        cfg,
        &DecomposeOptions::default(),
    )?)
}

pub fn scored_with(
    g: &HarmGraph,
    overlay: &ScenarioOverlay,
    target: NodeId,
    cfg: &HarmConfig,
) -> Result<f64, WhatIfError> {
    scored_breakdown(g, overlay, target, cfg).map(|b| b.value)
}

fn check_pair(g: &HarmGraph, target: NodeId, b: NodeId) -> Result<(), WhatIfError> {
    g.check(target)?;
    g.check(b)?;
    if target == b {
        return Err(WhatIfError::SelfQuery(b));
    }
    Ok(())
}

/// How much worse `target` scores if `b` had the worst possible harm.
pub fn vulnerability(g: &HarmGraph, target: NodeId, b: NodeId, cfg: &HarmConfig) -> Result<f64, WhatIfError> {
    check_pair(g, target, b)?;
    let base = scored_with(g, &ScenarioOverlay::new(), target, cfg)?;
    let worst = ScenarioOverlay::new().with_override(b, 100.0)?;
    Ok(scored_with(g, &worst, target, cfg)? - base)
}

/// Change in `target`'s score when `b` disappears. Negative means `b`'s
/// presence makes the target look worse.
pub fn influence(g: &HarmGraph, target: NodeId, b: NodeId, cfg: &HarmConfig) -> Result<f64, WhatIfError> {
    check_pair(g, target, b)?;
    let base = scored_with(g, &ScenarioOverlay::new(), target, cfg)?;
    let gone = ScenarioOverlay::new().with_removal(b)?;
    Ok(scored_with(g, &gone, target, cfg)? - base)
}

fn base_scores(g: &HarmGraph, cfg: &HarmConfig) -> Result<Vec<f64>, WhatIfError> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    crate::par_map(&nodes, |&n| scored_with(g, &ScenarioOverlay::new(), n, cfg))
        .into_iter()
        .collect()
}

/// `I(n, b)` for every `n != b`, given precomputed base scores.
fn influence_column(
    g: &HarmGraph,
    b: NodeId,
    cfg: &HarmConfig,
    base: &[f64],
) -> Result<Vec<f64>, WhatIfError> {
    let gone = ScenarioOverlay::new().with_removal(b)?;
    g.nodes()
        .map(|n| {
            if n == b {
                Ok(0.0)
            } else {
                Ok(scored_with(g, &gone, n, cfg)? - base[n.index()])
            }
        })
        .collect()
}

/// Sum of `b`'s influence over every other node.
pub fn global_influence(g: &HarmGraph, b: NodeId, cfg: &HarmConfig) -> Result<f64, WhatIfError> {
    g.check(b)?;
    let base = base_scores(g, cfg)?;
    Ok(influence_column(g, b, cfg, &base)?.iter().sum())
}

/// All-pairs influence. `column(b)[n]` is `I(n, b)`; the diagonal is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceMatrix {
    columns: Vec<Vec<f64>>,
}

impl InfluenceMatrix {
    pub fn compute(g: &HarmGraph, cfg: &HarmConfig) -> Result<Self, WhatIfError> {
        let base = base_scores(g, cfg)?;
        let nodes: Vec<NodeId> = g.nodes().collect();
        let columns = crate::par_map(&nodes, |&b| influence_column(g, b, cfg, &base))
            .into_iter()
            .collect::<Result<_, _>>()?;
        Ok(InfluenceMatrix { columns })
    }

    pub fn get(&self, target: NodeId, b: NodeId) -> f64 {
        self.columns[b.index()][target.index()]
    }

    pub fn column(&self, b: NodeId) -> &[f64] {
        &self.columns[b.index()]
    }

    /// Global influence of every node, in id order.
    pub fn global(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingKind {
    Vulnerability,
    Influence,
    Global,
}

impl std::str::FromStr for RankingKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vulnerability" => Ok(RankingKind::Vulnerability),
            "influence" => Ok(RankingKind::Influence),
            "global" => Ok(RankingKind::Global),
            other => Err(format!(
                "unknown ranking `{other}` (expected vulnerability, influence or global)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub node: NodeId,
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub kind: RankingKind,
    /// Target label; absent for global rankings.
    pub target: Option<String>,
    pub config: HarmConfig,
    pub entries: Vec<RankEntry>,
}

fn ranked(g: &HarmGraph, scores: impl IntoIterator<Item = (NodeId, f64)>, top_n: usize) -> Vec<RankEntry> {
    let mut entries: Vec<RankEntry> = scores
        .into_iter()
        .map(|(node, score)| RankEntry {
            node,
            label: g.label(node).to_string(),
            score,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.score
            .abs()
            .total_cmp(&a.score.abs())
            .then_with(|| a.label.cmp(&b.label))
    });
    entries.truncate(top_n);
    entries
}

/// Nodes ranked by the size of their vulnerability or influence score on
/// `target`, largest first, ties broken by label.
pub fn rank_report(
    g: &HarmGraph,
    target: NodeId,
    kind: RankingKind,
    cfg: &HarmConfig,
    top_n: usize,
) -> Result<InfluenceReport, WhatIfError> {
    if kind == RankingKind::Global {
        return global_report(g, cfg, top_n);
    }
    g.check(target)?;
    let base = scored_with(g, &ScenarioOverlay::new(), target, cfg)?;
    let others: Vec<NodeId> = g.nodes().filter(|&b| b != target).collect();
    let scores = crate::par_map(&others, |&b| {
        let overlay = match kind {
            RankingKind::Vulnerability => ScenarioOverlay::new().with_override(b, 100.0)?,
            _ => ScenarioOverlay::new().with_removal(b)?,
        };
        Ok::<_, WhatIfError>((b, scored_with(g, &overlay, target, cfg)? - base))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(InfluenceReport {
        kind,
        target: Some(g.label(target).to_string()),
        config: *cfg,
        entries: ranked(g, scores, top_n.max(1)),
    })
}

pub fn global_report(g: &HarmGraph, cfg: &HarmConfig, top_n: usize) -> Result<InfluenceReport, WhatIfError> {
    let gi = InfluenceMatrix::compute(g, cfg)?.global();
    Ok(InfluenceReport {
        kind: RankingKind::Global,
        target: None,
        config: *cfg,
        entries: ranked(g, g.nodes().zip(gi), top_n.max(1)),
    })
}
