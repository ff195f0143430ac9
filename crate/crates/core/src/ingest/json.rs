// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::graph::{HarmGraph, NodeSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonNode {
    pub id: u32,
    pub label: String,
    pub harm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// The graph exchange document: `{"nodes": [...], "edges": [[src, dst], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub nodes: Vec<JsonNode>,
    pub edges: Vec<[u32; 2]>,
}

impl GraphDocument {
    pub fn from_graph(g: &HarmGraph) -> Self {
        GraphDocument {
            nodes: g
                .nodes()
                .map(|v| JsonNode {
                    id: v.0,
                    label: g.label(v).to_string(),
                    harm: g.harm(v),
                    name: g.name(v).map(str::to_string),
                })
                .collect(),
            edges: g.edges().map(|(s, d)| [s.0, d.0]).collect(),
        }
    }

    /// Rebuilds the graph. Ids may be arbitrary but must be unique; nodes
    /// keep document order.
    pub fn to_graph(&self) -> Result<HarmGraph, IngestError> {
        let mut by_id: HashMap<u32, &str> = HashMap::with_capacity(self.nodes.len());
        for n in &self.nodes {
            if by_id.insert(n.id, &n.label).is_some() {
                return Err(IngestError::Json(format!("duplicate node id {}", n.id)));
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for [s, d] in &self.edges {
            let end = |id: &u32| {
                by_id
                    .get(id)
                    .copied()
                    .ok_or_else(|| IngestError::Json(format!("edge references unknown node id {id}")))
            };
            edges.push((end(s)?, end(d)?));
        }
        HarmGraph::build(
            self.nodes.iter().map(|n| NodeSpec {
                label: n.label.clone(),
                harm: n.harm,
                name: n.name.clone(),
            }),
            edges,
        )
        .map_err(|e| IngestError::Json(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<HarmGraph, IngestError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| IngestError::Json(e.to_string()))?;
        doc.to_graph()
    }
}
