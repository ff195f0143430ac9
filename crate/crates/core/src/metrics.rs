// SPDX-License-Identifier: Apache-2.0

//! Aggregators, per-level harms and network harm.
//!
//! Network harm aggregates, over levels `m = 1..m_max`, the damped level
//! values `alpha^(m-1) * x^m`, where `x^m` aggregates the harms of the level-`m`
//! origins (with path multiplicity). The inner aggregator works within a
//! level, the outer one across levels.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Direction, GraphError, HarmGraph, NodeId};
use crate::paths::{
    decompose_with, DecomposeOptions, LevelDecomposition, Multiplicity, PathError, PathScheme,
    MAX_LEVELS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("cannot aggregate an empty multiset")]
    EmptyMultiset,
    #[error("alpha must be in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("top-k percentage must be in (0, 100], got {0}")]
    InvalidTopK(f64),
    #[error(
        "sum/sum over all walks diverges without a finite m_max: alpha {alpha} >= 1/{radius}"
    )]
    DivergentConfig { alpha: f64, radius: f64 },
    #[error("the all-paths scheme needs an explicit m_max")]
    UnboundedWalks,
}

/// Reduces a multiset of values to one number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Aggregator {
    Max,
    Avg,
    /// Mean of the values in the top `k` percent (nearest-rank threshold).
    TopK(f64),
    Sum,
}

impl Aggregator {
    pub fn top_k(k: f64) -> Result<Self, MetricsError> {
        if k.is_finite() && k > 0.0 && k <= 100.0 {
            Ok(Aggregator::TopK(k))
        } else {
            Err(MetricsError::InvalidTopK(k))
        }
    }

    /// Whether outputs stay within the range of the inputs.
    pub fn is_bounded(self) -> bool {
        !matches!(self, Aggregator::Sum)
    }

    /// Aggregates `(value, multiplicity)` pairs. Zero multiplicities are ignored.
    pub fn apply(self, values: &[(f64, Multiplicity)]) -> Result<f64, MetricsError> {
        aggregate(self, values)
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregator::Max => f.write_str("max"),
            Aggregator::Avg => f.write_str("avg"),
            Aggregator::Sum => f.write_str("sum"),
            Aggregator::TopK(k) => write!(f, "top-{k}"),
        }
    }
}

impl std::str::FromStr for Aggregator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "max" => return Ok(Aggregator::Max),
            "avg" | "mean" | "average" => return Ok(Aggregator::Avg),
            "sum" => return Ok(Aggregator::Sum),
            _ => {}
        }
        let k = ["top-k:", "topk:", "top-", "top"]
            .iter()
            .find_map(|p| lower.strip_prefix(p))
            .ok_or_else(|| {
                format!("unknown aggregator `{s}` (expected max, avg, sum or top-<k>)")
            })?;
        let k: f64 = k
            .parse()
            .map_err(|_| format!("invalid top-k percentage in `{s}`"))?;
        Aggregator::top_k(k).map_err(|e| e.to_string())
    }
}

impl TryFrom<String> for Aggregator {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Aggregator> for String {
    fn from(a: Aggregator) -> String {
        a.to_string()
    }
}

pub fn aggregate(agg: Aggregator, values: &[(f64, Multiplicity)]) -> Result<f64, MetricsError> {
    let present: Vec<(f64, Multiplicity)> =
        values.iter().copied().filter(|&(_, m)| m > 0).collect();
    if present.is_empty() {
        return Err(MetricsError::EmptyMultiset);
    }
    let weighted_sum = |vs: &[(f64, Multiplicity)]| vs.iter().map(|&(v, m)| v * m as f64).sum::<f64>();
    let count = |vs: &[(f64, Multiplicity)]| vs.iter().map(|&(_, m)| m as f64).sum::<f64>();
    Ok(match agg {
        Aggregator::Max => present.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        Aggregator::Sum => weighted_sum(&present),
        Aggregator::Avg => weighted_sum(&present) / count(&present),
        Aggregator::TopK(k) => {
            let mut sorted = present;
            sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
            let total: Multiplicity = sorted.iter().map(|p| p.1).sum();
            // Nearest rank on the descending, multiplicity-expanded list.
            let rank = ((k * total as f64 / 100.0) - 1e-9).ceil().max(1.0);
            let rank = (rank as Multiplicity).min(total);
            let mut seen: Multiplicity = 0;
            let mut threshold = sorted[0].0;
            for &(v, m) in &sorted {
                seen += m;
                if seen >= rank {
                    threshold = v;
                    break;
                }
            }
            let top: Vec<(f64, Multiplicity)> =
                sorted.into_iter().filter(|&(v, _)| v >= threshold).collect();
            weighted_sum(&top) / count(&top)
        }
    })
}

/// Full description of a network harm metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmConfig {
    pub inner: Aggregator,
    pub outer: Aggregator,
    pub alpha: f64,
    /// Longest path length considered. `None` means exhaustive for the
    /// loop-free schemes and convergence-driven for sum/sum over walks.
    #[serde(rename = "mmax", alias = "m_max")]
    pub m_max: Option<usize>,
    pub scheme: PathScheme,
    pub direction: Direction,
}

impl Default for HarmConfig {
    fn default() -> Self {
        HarmConfig {
            inner: Aggregator::Avg,
            outer: Aggregator::Max,
            alpha: 0.85,
            m_max: None,
            scheme: PathScheme::AllShortestPaths,
            direction: Direction::Upstream,
        }
    }
}

impl HarmConfig {
    pub fn new(outer: Aggregator, inner: Aggregator, alpha: f64) -> Self {
        HarmConfig {
            inner,
            outer,
            alpha,
            ..Default::default()
        }
    }

    pub fn with_scheme(mut self, scheme: PathScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_m_max(mut self, m_max: usize) -> Self {
        self.m_max = Some(m_max);
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(MetricsError::AlphaOutOfRange(self.alpha));
        }
        for agg in [self.inner, self.outer] {
            if let Aggregator::TopK(k) = agg {
                Aggregator::top_k(k)?;
            }
        }
        if let Some(m) = self.m_max {
            if m == 0 || m > MAX_LEVELS {
                return Err(PathError::InvalidMMax(m).into());
            }
        }
        Ok(())
    }

    /// Concrete level count for `g`.
    pub fn resolve_m_max(&self, g: &HarmGraph) -> Result<usize, MetricsError> {
        self.validate()?;
        if let Some(m) = self.m_max {
            return Ok(m);
        }
        let exhaustive = g.node_count().saturating_sub(1).max(1);
        if self.scheme != PathScheme::AllPaths {
            return Ok(exhaustive);
        }
        if self.inner != Aggregator::Sum || self.outer != Aggregator::Sum {
            return Err(MetricsError::UnboundedWalks);
        }
        let radius = g.spectral_radius_estimate()?.value;
        if radius == 0.0 {
            return Ok(exhaustive);
        }
        let ratio = self.alpha * radius;
        if ratio >= 1.0 {
            return Err(MetricsError::DivergentConfig {
                alpha: self.alpha,
                radius,
            });
        }
        // Truncate once the geometric tail is far below f64 resolution of the
        // leading terms; the nilpotent part needs at most n levels.
        let levels = (1e-13f64.ln() / ratio.ln()).ceil() as usize;
        Ok(levels.max(g.node_count()).clamp(1, MAX_LEVELS))
    }
}

impl fmt::Display for HarmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "H[{},{}] alpha={} mmax={} scheme={} direction={}",
            self.outer,
            self.inner,
            self.alpha,
            self.m_max.map_or("auto".to_string(), |m| m.to_string()),
            self.scheme,
            self.direction.as_str()
        )
    }
}

/// Per-level inner aggregates; `None` marks an empty level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelHarm {
    pub values: Vec<Option<f64>>,
}

pub fn level_harms(
    dec: &LevelDecomposition,
    harms: &[f64],
    inner: Aggregator,
) -> Result<LevelHarm, MetricsError> {
    let values = dec
        .levels
        .iter()
        .map(|level| {
            if level.is_empty() {
                return Ok(None);
            }
            let vals: Vec<(f64, Multiplicity)> = level
                .entries
                .iter()
                .map(|(id, &m)| (harms[id.index()], m))
                .collect();
            aggregate(inner, &vals).map(Some)
        })
        .collect::<Result<_, _>>()?;
    Ok(LevelHarm { values })
}

/// One row of a network harm breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub m: usize,
    /// Number of counted paths.
    pub size: Multiplicity,
    /// Number of distinct origin nodes.
    pub distinct: usize,
    pub x_m: Option<f64>,
    pub weighted: Option<f64>,
}

/// Network harm with its per-level breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmBreakdown {
    pub target: NodeId,
    #[serde(rename = "H")]
    pub value: f64,
    pub m_max: usize,
    pub levels: Vec<LevelRow>,
}

/// Combines level values with the outer aggregator. Empty levels are skipped,
/// including in the normaliser of an outer average; no levels at all gives 0.
pub fn combine_levels(levels: &LevelHarm, outer: Aggregator, alpha: f64) -> Result<f64, MetricsError> {
    let mut weighted = Vec::new();
    let mut norm = 0.0;
    for (i, x) in levels.values.iter().enumerate() {
        if let Some(x) = x {
            let w = alpha.powi(i as i32);
            weighted.push((w * x, 1));
            norm += w;
        }
    }
    if weighted.is_empty() {
        return Ok(0.0);
    }
    match outer {
        Aggregator::Avg => Ok(weighted.iter().map(|p| p.0).sum::<f64>() / norm),
        other => aggregate(other, &weighted),
    }
}

/// A breakdown with the target named by label and the configuration that
/// produced it. This is the serialized form shared by the CLI and service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub target: String,
    #[serde(rename = "H")]
    pub value: f64,
    pub m_max: usize,
    pub config: HarmConfig,
    pub levels: Vec<LevelRow>,
}

impl ScoreReport {
    pub fn new(g: &HarmGraph, b: HarmBreakdown, cfg: &HarmConfig) -> Self {
        ScoreReport {
            target: g.label(b.target).to_string(),
            value: b.value,
            m_max: b.m_max,
            config: *cfg,
            levels: b.levels,
        }
    }
}

/// Scores `target` on a graph, optionally with substituted harms and
/// removed nodes.
pub fn evaluate_scenario(
    g: &HarmGraph,
    harms: &[f64],
    removed: Option<&[bool]>,
    target: NodeId,
    cfg: &HarmConfig,
    opts: &DecomposeOptions,
) -> Result<HarmBreakdown, MetricsError> {
    g.check(target)?;
    let m_max = cfg.resolve_m_max(g)?;
    let dec = decompose_with(g, target, cfg.direction, cfg.scheme, m_max, removed, opts)?;
    breakdown(&dec, harms, cfg)
}

/// Scores a precomputed decomposition.
pub fn breakdown(
    dec: &LevelDecomposition,
    harms: &[f64],
    cfg: &HarmConfig,
) -> Result<HarmBreakdown, MetricsError> {
    let lh = level_harms(dec, harms, cfg.inner)?;
    let value = combine_levels(&lh, cfg.outer, cfg.alpha)?;
    let levels = dec
        .levels
        .iter()
        .zip(&lh.values)
        .map(|(level, x)| LevelRow {
            m: level.level,
            size: level.total(),
            distinct: level.distinct(),
            x_m: *x,
            weighted: x.map(|x| cfg.alpha.powi(level.level as i32 - 1) * x),
        })
        .collect();
    Ok(HarmBreakdown {
        target: dec.target,
        value,
        m_max: dec.m_max,
        levels,
    })
}

pub fn evaluate(g: &HarmGraph, target: NodeId, cfg: &HarmConfig) -> Result<HarmBreakdown, MetricsError> {
    evaluate_scenario(g, g.harms(), None, target, cfg, &DecomposeOptions::default())
}

/// Network harm of `target` under `cfg`.
pub fn network_harm(g: &HarmGraph, target: NodeId, cfg: &HarmConfig) -> Result<f64, MetricsError> {
    evaluate(g, target, cfg).map(|b| b.value)
}

/// Network harm for every node, in id order.
pub fn network_harm_all(g: &HarmGraph, cfg: &HarmConfig) -> Result<Vec<f64>, MetricsError> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    crate::par_map(&nodes, |&v| network_harm(g, v, cfg))
        .into_iter()
        .collect()
}

/// Weighted linear combination of intrinsic harm and network scores.
pub fn combine_scores(intrinsic: f64, w_intrinsic: f64, network: &[(f64, f64)]) -> f64 {
    w_intrinsic * intrinsic + network.iter().map(|(w, h)| w * h).sum::<f64>()
}
