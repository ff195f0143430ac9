// SPDX-License-Identifier: Apache-2.0

//! Small named networks used by tests, the CLI and the demo page.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::graph::{HarmGraph, NodeSpec};

pub const NAMES: [&str; 11] = [
    "fig2", "fig3a", "fig3b", "fig5a", "fig5b", "fig5c", "fig6", "chain", "cycle", "star", "pair",
];

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownFixture(pub String);

impl fmt::Display for UnknownFixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown fixture `{}` (available: {})", self.0, NAMES.join(", "))
    }
}

impl std::error::Error for UnknownFixture {}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    /// Label of the node the fixture is built around.
    pub target: &'static str,
    /// Provenance and shape, written into exported file headers.
    pub description: &'static str,
    pub graph: HarmGraph,
}

fn build(nodes: &[(&str, f64)], edges: &[(&str, &str)]) -> HarmGraph {
    HarmGraph::build(nodes.iter().copied(), edges.iter().copied()).expect("fixture is well formed")
}

const FIG5A_NODES: [(&str, f64); 7] = [
    ("t0", 0.0),
    ("n85", 85.0),
    ("n10", 10.0),
    ("n60", 60.0),
    ("n75", 75.0),
    ("n55a", 55.0),
    ("n55b", 55.0),
];
const FIG5A_EDGES: [(&str, &str); 6] = [
    ("n85", "t0"),
    ("n10", "t0"),
    ("n60", "n85"),
    ("n75", "n85"),
    ("n55a", "n10"),
    ("n55b", "n10"),
];
const FIG5B_EXTRA_NODES: [(&str, f64); 2] = [("n100", 100.0), ("n50", 50.0)];
const FIG5B_EXTRA_EDGES: [(&str, &str); 4] = [
    ("n75", "t0"),
    ("n100", "n55a"),
    ("n100", "n55b"),
    ("n50", "n60"),
];

fn fig5(stage: u8) -> HarmGraph {
    let mut nodes = FIG5A_NODES.to_vec();
    let mut edges = FIG5A_EDGES.to_vec();
    if stage >= 1 {
        nodes.extend(FIG5B_EXTRA_NODES);
        edges.extend(FIG5B_EXTRA_EDGES);
    }
    if stage >= 2 {
        edges.push(("n85", "n75"));
    }
    build(&nodes, &edges)
}

pub fn fixture(name: &str) -> Result<Fixture, UnknownFixture> {
    let f = match name {
        "fig2" => Fixture {
            name: "fig2",
            target: "a",
            description: "supply network around a: bad suppliers e and d, bad customers f and d, \
                          c linked directly and through d, loops a-g-d and a-d",
            graph: build(
                &[
                    ("a", 10.0),
                    ("b", 20.0),
                    ("c", 30.0),
                    ("d", 85.0),
                    ("e", 90.0),
                    ("f", 95.0),
                    ("g", 40.0),
                ],
                &[
                    ("e", "a"),
                    ("d", "a"),
                    ("c", "a"),
                    ("b", "a"),
                    ("a", "f"),
                    ("a", "d"),
                    ("c", "d"),
                    ("a", "g"),
                    ("g", "d"),
                    ("c", "b"),
                ],
            ),
        },
        "fig3a" => Fixture {
            name: "fig3a",
            target: "a",
            description: "two targets with equal maximum supplier harm (90) but different \
                          remaining suppliers",
            graph: build(
                &[
                    ("a", 0.0),
                    ("b", 0.0),
                    ("a1", 90.0),
                    ("a2", 10.0),
                    ("a3", 10.0),
                    ("b1", 90.0),
                    ("b2", 85.0),
                    ("b3", 80.0),
                ],
                &[("a1", "a"), ("a2", "a"), ("a3", "a"), ("b1", "b"), ("b2", "b"), ("b3", "b")],
            ),
        },
        "fig3b" => Fixture {
            name: "fig3b",
            target: "a",
            description: "two targets with equal average supplier harm (50): two neutral \
                          suppliers versus one very bad and one perfect supplier",
            graph: build(
                &[("a", 0.0), ("b", 0.0), ("a1", 50.0), ("a2", 50.0), ("b1", 100.0), ("b2", 0.0)],
                &[("a1", "a"), ("a2", "a"), ("b1", "b"), ("b2", "b")],
            ),
        },
        "fig5a" => Fixture {
            name: "fig5a",
            target: "t0",
            description: "tree-shaped supply network for t0; level 1 = {85, 10}, \
                          level 2 = {75, 60, 55, 55}; node labels encode harm",
            graph: fig5(0),
        },
        "fig5b" => Fixture {
            name: "fig5b",
            target: "t0",
            description: "fig5a plus a direct edge n75 -> t0 and two base suppliers: n100 \
                          (two paths of length 3) and n50 (one path of length 3)",
            graph: fig5(1),
        },
        "fig5c" => Fixture {
            name: "fig5c",
            target: "t0",
            description: "fig5b plus n85 -> n75, creating a loop n75 <-> n85 and the single \
                          length-4 simple path n50 -> n60 -> n85 -> n75 -> t0",
            graph: fig5(2),
        },
        "fig6" => Fixture {
            name: "fig6",
            target: "t0",
            description: "toy supply network of depth 3 for t0 with a longest simple path of \
                          length 7; the worst node (n100) is three steps away and n90 reaches \
                          t0 through the central first-layer node n50",
            graph: build(
                &[
                    ("t0", 0.0),
                    ("n55", 55.0),
                    ("n50", 50.0),
                    ("n20", 20.0),
                    ("n30", 30.0),
                    ("n90", 90.0),
                    ("n40", 40.0),
                    ("n65", 65.0),
                    ("n35", 35.0),
                    ("n70", 70.0),
                    ("n100", 100.0),
                    ("n80", 80.0),
                    ("n25", 25.0),
                ],
                &[
                    ("n55", "t0"),
                    ("n50", "t0"),
                    ("n20", "t0"),
                    ("n30", "t0"),
                    ("n90", "n50"),
                    ("n40", "n55"),
                    ("n65", "n50"),
                    ("n35", "n30"),
                    ("n70", "n20"),
                    ("n100", "n40"),
                    ("n80", "n35"),
                    ("n25", "n70"),
                    ("n55", "n65"),
                    ("n35", "n100"),
                ],
            ),
        },
        "chain" => Fixture {
            name: "chain",
            target: "a",
            description: "three-node chain c -> b -> a with a worst-rated origin",
            graph: build(&[("c", 100.0), ("b", 0.0), ("a", 0.0)], &[("c", "b"), ("b", "a")]),
        },
        "cycle" => Fixture {
            name: "cycle",
            target: "a",
            description: "directed 3-cycle a -> g -> d -> a",
            graph: build(
                &[("a", 0.0), ("g", 40.0), ("d", 80.0)],
                &[("a", "g"), ("g", "d"), ("d", "a")],
            ),
        },
        "star" => Fixture {
            name: "star",
            target: "hub",
            description: "hub supplied by five perfect-rated leaves",
            graph: build(
                &[("hub", 50.0), ("l1", 0.0), ("l2", 0.0), ("l3", 0.0), ("l4", 0.0), ("l5", 0.0)],
                &[("l1", "hub"), ("l2", "hub"), ("l3", "hub"), ("l4", "hub"), ("l5", "hub")],
            ),
        },
        "pair" => Fixture {
            name: "pair",
            target: "a",
            description: "single supply edge b -> a, with b worst-rated",
            graph: build(&[("a", 0.0), ("b", 100.0)], &[("b", "a")]),
        },
        other => return Err(UnknownFixture(other.to_string())),
    };
    Ok(f)
}

/// Seeded random digraph on `n` nodes labelled `v0..`, each ordered pair
/// linked with probability `p`, integer harms in `[0, 100]`. With `acyclic`,
/// edges only run from higher to lower ids.
pub fn random_graph(seed: u64, n: usize, p: f64, acyclic: bool) -> HarmGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let nodes: Vec<NodeSpec> = (0..n)
        .map(|i| NodeSpec::new(format!("v{i}"), rng.random_range(0..=100u32) as f64))
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (acyclic && u < v) {
                continue;
            }
            if rng.random_bool(p) {
                edges.push((format!("v{u}"), format!("v{v}")));
            }
        }
    }
    HarmGraph::build(nodes, edges).expect("generated graph is well formed")
}
