// SPDX-License-Identifier: Apache-2.0

//! Network harm analytics for node-valued directed graphs.
//!
//! Nodes carry a harm score in `[0, 100]`; edges are supply relations. The
//! crate scores a target by collecting harm along paths, level by level, with
//! configurable path counting and aggregation, and answers what-if questions
//! (vulnerability, influence, global influence) by re-scoring under overlays.

pub mod centrality;
pub mod fixtures;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod paths;
pub mod whatif;

pub use graph::{Direction, GraphError, HarmGraph, HarmScore, NodeId, NodeSpec};
pub use metrics::{
    network_harm, Aggregator, HarmBreakdown, HarmConfig, MetricsError, ScoreReport,
};
pub use paths::{decompose, LevelDecomposition, PathScheme};
pub use whatif::{influence, vulnerability, ScenarioOverlay};

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order always matches input order.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}
