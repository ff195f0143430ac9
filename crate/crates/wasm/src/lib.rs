// SPDX-License-Identifier: Apache-2.0

//! Browser bindings. [`Explorer`] holds a graph, a target, a config and a
//! what-if overlay; the page drives it through [`Demo`], which exchanges
//! JSON strings with JavaScript.

use std::collections::VecDeque;

use harmnet_core::fixtures::{fixture, NAMES};
use harmnet_core::ingest::GraphDocument;
use harmnet_core::metrics::LevelRow;
use harmnet_core::whatif::{rank_report, scored_breakdown, RankingKind};
use harmnet_core::{HarmConfig, HarmGraph, NodeId, ScenarioOverlay};
use serde::Serialize;
use serde_json::Value;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
struct NodeView {
    id: NodeId,
    label: String,
    harm: f64,
    /// Harm after overrides.
    effective: f64,
    overridden: bool,
    removed: bool,
    /// Shortest distance to the target along the configured direction.
    layer: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct View {
    target: String,
    config: HarmConfig,
    #[serde(rename = "H")]
    value: f64,
    baseline: f64,
    delta: f64,
    m_max: usize,
    levels: Vec<LevelRow>,
    nodes: Vec<NodeView>,
    edges: Vec<(NodeId, NodeId)>,
}

pub struct Explorer {
    graph: HarmGraph,
    target: NodeId,
    config: HarmConfig,
    overlay: ScenarioOverlay,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

impl Explorer {
    pub fn new(graph: HarmGraph, target: &str) -> Result<Self, String> {
        let target = graph.require(target).map_err(err)?;
        Ok(Explorer {
            graph,
            target,
            config: HarmConfig::default(),
            overlay: ScenarioOverlay::new(),
        })
    }

    pub fn from_fixture(name: &str) -> Result<Self, String> {
        let f = fixture(name).map_err(err)?;
        Explorer::new(f.graph, f.target)
    }

    /// A graph document, or any JSON carrying one under `graph`. The target
    /// defaults to the first node.
    pub fn from_json(text: &str, target: Option<&str>) -> Result<Self, String> {
        let mut v: Value = serde_json::from_str(text).map_err(err)?;
        if let Some(inner) = v.get_mut("graph") {
            v = inner.take();
        }
        let doc: GraphDocument = serde_json::from_value(v).map_err(err)?;
        let graph = doc.to_graph().map_err(err)?;
        let first = graph.nodes().next().map(|v| graph.label(v).to_string()).ok_or("graph has no nodes")?;
        Explorer::new(graph, target.unwrap_or(&first))
    }

    fn node(&self, label: &str) -> Result<NodeId, String> {
        self.graph.require(label).map_err(err)
    }

    fn layers(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.graph.node_count()];
        dist[self.target.index()] = Some(0);
        let mut queue = VecDeque::from([self.target]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v.index()].unwrap();
            let next = match self.config.direction {
                harmnet_core::Direction::Upstream => self.graph.in_neighbors(v),
                harmnet_core::Direction::Downstream => self.graph.out_neighbors(v),
            }
            .expect("node in range");
            for &w in next {
                if dist[w.index()].is_none() && !self.overlay.removed_nodes.contains(&w) {
                    dist[w.index()] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn view(&self) -> Result<View, String> {
        let g = &self.graph;
        let now = scored_breakdown(g, &self.overlay, self.target, &self.config).map_err(err)?;
        let base = scored_breakdown(g, &ScenarioOverlay::new(), self.target, &self.config).map_err(err)?;
        let layers = self.layers();
        Ok(View {
            target: g.label(self.target).to_string(),
            config: self.config,
            value: now.value,
            baseline: base.value,
            delta: now.value - base.value,
            m_max: now.m_max,
            levels: now.levels,
            nodes: g
                .nodes()
                .map(|v| NodeView {
                    id: v,
                    label: g.label(v).to_string(),
                    harm: g.harm(v),
                    effective: self.overlay.harm_overrides.get(&v).copied().unwrap_or(g.harm(v)),
                    overridden: self.overlay.harm_overrides.contains_key(&v),
                    removed: self.overlay.removed_nodes.contains(&v),
                    layer: layers[v.index()],
                })
                .collect(),
            edges: g.edges().collect(),
        })
    }

    pub fn set_target(&mut self, label: &str) -> Result<(), String> {
        let t = self.node(label)?;
        if self.overlay.removed_nodes.contains(&t) {
            return Err(format!("`{label}` is removed"));
        }
        self.target = t;
        Ok(())
    }

    /// Replaces the config with `json`; missing fields take defaults.
    pub fn set_config(&mut self, json: &str) -> Result<(), String> {
        let cfg: HarmConfig = serde_json::from_str(json).map_err(err)?;
        cfg.validate().map_err(err)?;
        cfg.resolve_m_max(&self.graph).map_err(err)?;
        self.config = cfg;
        Ok(())
    }

    pub fn set_harm(&mut self, label: &str, harm: f64) -> Result<(), String> {
        let v = self.node(label)?;
        self.overlay.set_override(v, harm).map_err(err)
    }

    pub fn clear_harm(&mut self, label: &str) -> Result<(), String> {
        let v = self.node(label)?;
        self.overlay.clear_override(v);
        Ok(())
    }

    /// Removes the node, or restores it if already removed.
    pub fn toggle_removed(&mut self, label: &str) -> Result<bool, String> {
        let v = self.node(label)?;
        if v == self.target {
            return Err("the target cannot be removed".into());
        }
        if self.overlay.restore(v) {
            return Ok(false);
        }
        self.overlay.remove(v).map_err(err)?;
        Ok(true)
    }

    pub fn reset(&mut self) {
        self.overlay = ScenarioOverlay::new();
    }

    /// Ranking on the unedited graph.
    pub fn ranking(&self, kind: &str, top: usize) -> Result<Value, String> {
        let kind: RankingKind = kind.parse()?;
        let r = rank_report(&self.graph, self.target, kind, &self.config, top).map_err(err)?;
        serde_json::to_value(r).map_err(err)
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("views serialize")
}

#[wasm_bindgen]
pub fn fixture_names() -> Vec<String> {
    NAMES.iter().map(|s| s.to_string()).collect()
}

#[wasm_bindgen]
pub struct Demo(Explorer);

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(js_name = fromFixture)]
    pub fn from_fixture(name: &str) -> Result<Demo, JsError> {
        Explorer::from_fixture(name).map(Demo).map_err(js)
    }

    #[wasm_bindgen(js_name = fromJson)]
    pub fn from_json(text: &str, target: Option<String>) -> Result<Demo, JsError> {
        Explorer::from_json(text, target.as_deref()).map(Demo).map_err(js)
    }

    pub fn view(&self) -> Result<String, JsError> {
        self.0.view().map(|v| to_json(&v)).map_err(js)
    }

    #[wasm_bindgen(js_name = setTarget)]
    pub fn set_target(&mut self, label: &str) -> Result<(), JsError> {
        self.0.set_target(label).map_err(js)
    }

    #[wasm_bindgen(js_name = setConfig)]
    pub fn set_config(&mut self, json: &str) -> Result<(), JsError> {
        self.0.set_config(json).map_err(js)
    }

    #[wasm_bindgen(js_name = setHarm)]
    pub fn set_harm(&mut self, label: &str, harm: f64) -> Result<(), JsError> {
        self.0.set_harm(label, harm).map_err(js)
    }

    #[wasm_bindgen(js_name = clearHarm)]
    pub fn clear_harm(&mut self, label: &str) -> Result<(), JsError> {
        self.0.clear_harm(label).map_err(js)
    }

    #[wasm_bindgen(js_name = toggleRemoved)]
    pub fn toggle_removed(&mut self, label: &str) -> Result<bool, JsError> {
        self.0.toggle_removed(label).map_err(js)
    }

    pub fn reset(&mut self) {
        self.0.reset();
    }

    pub fn ranking(&self, kind: &str, top: usize) -> Result<String, JsError> {
        self.0.ranking(kind, top).map(|v| to_json(&v)).map_err(js)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use harmnet_core::{influence, network_harm, vulnerability};

    fn h(e: &Explorer) -> f64 {
        e.view().unwrap().value
    }

    #[test]
    fn fixture_view_matches_library() {
        let e = Explorer::from_fixture("fig5a").unwrap();
        let v = e.view().unwrap();
        let f = fixture("fig5a").unwrap();
        let want = network_harm(&f.graph, f.graph.node("t0").unwrap(), &HarmConfig::default()).unwrap();
        assert_eq!(v.value, want);
        assert_eq!(v.delta, 0.0);
        assert_eq!(v.nodes.len(), 7);
        let layers: Vec<_> = v.nodes.iter().map(|n| n.layer).collect();
        assert_eq!(layers.iter().filter(|l| **l == Some(1)).count(), 2);
        assert_eq!(layers.iter().filter(|l| **l == Some(2)).count(), 4);
    }

    #[test]
    fn edits_give_vulnerability_and_influence() {
        let f = fixture("fig6").unwrap();
        let g = &f.graph;
        let t = g.node("t0").unwrap();
        let cfg = HarmConfig::default();
        let mut e = Explorer::from_fixture("fig6").unwrap();
        e.set_harm("n30", 100.0).unwrap();
        let v = vulnerability(g, t, g.node("n30").unwrap(), &cfg).unwrap();
        assert!((e.view().unwrap().delta - v).abs() < 1e-12);
        e.reset();
        assert!(e.toggle_removed("n90").unwrap());
        let i = influence(g, t, g.node("n90").unwrap(), &cfg).unwrap();
        assert!((e.view().unwrap().delta - i).abs() < 1e-12);
        assert!(!e.toggle_removed("n90").unwrap());
        assert_eq!(e.view().unwrap().delta, 0.0);
    }

    #[test]
    fn conflicts_and_bad_input_are_errors() {
        let mut e = Explorer::from_fixture("fig5b").unwrap();
        assert!(e.toggle_removed("t0").is_err());
        assert!(e.set_harm("n85", 120.0).is_err());
        assert!(e.set_harm("nope", 10.0).is_err());
        e.set_harm("n85", 10.0).unwrap();
        assert!(e.toggle_removed("n85").is_err());
        assert!(e.set_config(r#"{"alpha": 0}"#).is_err());
        assert!(e.set_config(r#"{"scheme": "all"}"#).is_err());
        assert!(e.set_config(r#"{"bogus": 1}"#).is_err());
        assert!(e.ranking("sideways", 5).is_err());
    }

    #[test]
    fn config_and_target_changes() {
        let mut e = Explorer::from_fixture("fig5a").unwrap();
        e.set_config(r#"{"inner": "avg", "outer": "avg", "alpha": 1, "scheme": "simple"}"#).unwrap();
        assert!((h(&e) - 54.375).abs() < 1e-9);
        e.set_target("n85").unwrap();
        assert_eq!(e.view().unwrap().target, "n85");
    }

    #[test]
    fn json_round_trip_and_rankings() {
        let f = fixture("pair").unwrap();
        let text = serde_json::json!({ "graph": GraphDocument::from_graph(&f.graph) }).to_string();
        let e = Explorer::from_json(&text, Some("a")).unwrap();
        assert_eq!(h(&e), 100.0);
        let r = e.ranking("global", 5).unwrap();
        assert_eq!(r["entries"][0]["label"], "b");
        assert_eq!(r["entries"][0]["score"], -100.0);
        let r = e.ranking("vulnerability", 5).unwrap();
        assert_eq!(r["target"], "a");
        assert!(Explorer::from_json("{}", None).is_err());
    }
}
