// SPDX-License-Identifier: Apache-2.0

//! Randomized self-checks against brute-force oracles. Graphs come from
//! [`random_graph`] with seeds `seed, seed + 1, ...`, so a failing case can
//! be re-created with `harmnet fixtures random --seed`.

use std::collections::VecDeque;
use std::time::Instant;

use harmnet_core::centrality::verify_reduction;
use harmnet_core::fixtures::random_graph;
use harmnet_core::paths::oracle::{collapse, enumerate_paths};
use harmnet_core::{decompose, Aggregator, Direction, HarmConfig, HarmGraph, NodeId, PathScheme};
use serde::Serialize;
use serde_json::json;

use crate::args::CheckArgs;
use crate::render::Table;
use crate::{CliError, CliResult, Ctx};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: u64,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn graphs(seed: u64, cases: u64, p: f64) -> impl Iterator<Item = (u64, HarmGraph)> {
    (0..cases).map(move |i| {
        let s = seed.wrapping_add(i);
        (s, random_graph(s, 1 + (i % 8) as usize, p, false))
    })
}

fn timed(name: &'static str, cases: u64, f: impl FnOnce() -> Result<String, String>) -> CheckOutcome {
    let start = Instant::now();
    let r = f();
    CheckOutcome {
        name,
        cases,
        passed: r.is_ok(),
        detail: r.unwrap_or_else(|e| e),
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn reduction(seed: u64, cases: u64) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (s, g) in graphs(seed, cases, 0.3) {
        let lambda = g.spectral_radius_estimate().map_err(|e| e.to_string())?.value;
        let alpha = if lambda > 0.0 { 0.5 / lambda } else { 0.5 };
        let cfg = HarmConfig::new(Aggregator::Sum, Aggregator::Sum, alpha.min(1.0)).with_scheme(PathScheme::AllPaths);
        let m = cfg.resolve_m_max(&g).map_err(|e| format!("seed {s}: {e}"))?;
        let r = verify_reduction(&g, alpha, m).map_err(|e| format!("seed {s}: {e}"))?;
        if !r.passed {
            return Err(format!("seed {s}: deviation {:.3e}", r.max_deviation));
        }
        worst = worst.max(r.max_deviation);
    }
    Ok(format!("max deviation {worst:.3e}"))
}

fn paths(seed: u64, cases: u64) -> Result<String, String> {
    let mut compared = 0u64;
    for (i, (s, g)) in graphs(seed, cases, 0.3).enumerate() {
        let m_max = 1 + i % 6;
        for scheme in PathScheme::ALL {
            for dir in [Direction::Upstream, Direction::Downstream] {
                for a in g.nodes() {
                    let want = enumerate_paths(&g, a, dir, scheme, m_max)
                        .map(|p| collapse(&p, a, dir, scheme, m_max))
                        .map_err(|e| format!("seed {s}: {e}"))?;
                    let got = decompose(&g, a, dir, scheme, m_max).map_err(|e| format!("seed {s}: {e}"))?;
                    if got != want {
                        return Err(format!("seed {s}: {scheme} {dir:?} target {a} m_max {m_max} differs"));
                    }
                    compared += 1;
                }
            }
        }
    }
    Ok(format!("{compared} decompositions match enumeration"))
}

/// `w[j]` = number of walks of length `m` from `j` to `a`, by repeated
/// multiplication with the adjacency matrix.
fn walk_counts(g: &HarmGraph, a: NodeId, m_max: usize) -> Vec<Vec<u128>> {
    let n = g.node_count();
    let mut adj = vec![vec![0u128; n]; n];
    for (u, v) in g.edges() {
        adj[u.index()][v.index()] = 1;
    }
    let mut cur: Vec<u128> = (0..n).map(|j| u128::from(j == a.index())).collect();
    let mut out = Vec::with_capacity(m_max);
    for _ in 0..m_max {
        cur = (0..n).map(|j| (0..n).map(|k| adj[j][k] * cur[k]).sum()).collect();
        out.push(cur.clone());
    }
    out
}

fn walk_powers(seed: u64, cases: u64) -> Result<String, String> {
    for (s, g) in graphs(seed, cases, 0.3) {
        for a in g.nodes() {
            let counts = walk_counts(&g, a, 6);
            let dec = decompose(&g, a, Direction::Upstream, PathScheme::AllPaths, 6).map_err(|e| e.to_string())?;
            for (m, row) in counts.iter().enumerate() {
                for j in g.nodes().filter(|&j| j != a) {
                    if dec.level(m + 1).multiplicity(j) != row[j.index()] {
                        return Err(format!("seed {s}: walks {j}->{a} length {}", m + 1));
                    }
                }
            }
        }
    }
    Ok("multiplicities equal adjacency powers".into())
}

/// Distance and number of shortest paths from every node to `a`, by BFS
/// over in-edges.
fn bfs_counts(g: &HarmGraph, a: NodeId) -> Vec<Option<(usize, u128)>> {
    let mut best: Vec<Option<(usize, u128)>> = vec![None; g.node_count()];
    best[a.index()] = Some((0, 1));
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        let (d, c) = best[v.index()].unwrap();
        for &u in g.in_neighbors(v).unwrap() {
            match &mut best[u.index()] {
                None => {
                    best[u.index()] = Some((d + 1, c));
                    queue.push_back(u);
                }
                Some((du, cu)) if *du == d + 1 => *cu += c,
                _ => {}
            }
        }
    }
    best
}

fn shortest(seed: u64, cases: u64) -> Result<String, String> {
    for (s, g) in graphs(seed, cases, 0.35) {
        let m_max = g.node_count().max(2) - 1;
        for a in g.nodes() {
            let dec = decompose(&g, a, Direction::Upstream, PathScheme::AllShortestPaths, m_max)
                .map_err(|e| e.to_string())?;
            let bfs = bfs_counts(&g, a);
            for j in g.nodes().filter(|&j| j != a) {
                for m in 1..=m_max {
                    let want = match bfs[j.index()] {
                        Some((d, c)) if d == m => c,
                        _ => 0,
                    };
                    if dec.level(m).multiplicity(j) != want {
                        return Err(format!("seed {s}: shortest {j}->{a} at level {m}"));
                    }
                }
            }
        }
    }
    Ok("multiplicities equal BFS path counts".into())
}

/// Runs every check on `cases` seeded graphs.
pub fn run_checks(seed: u64, cases: u64) -> Vec<CheckOutcome> {
    vec![
        timed("reduction", cases, || reduction(seed, cases)),
        timed("paths", cases, || paths(seed, cases)),
        timed("walk-powers", cases, || walk_powers(seed, cases)),
        timed("shortest-bfs", cases, || shortest(seed, cases)),
    ]
}

pub(crate) fn run(ctx: &mut Ctx, a: &CheckArgs) -> CliResult<()> {
    let outcomes = run_checks(a.seed, a.cases);
    let mut manifest = ctx.manifest("check");
    manifest.seed = Some(a.seed);
    let mut t = Table::new(["check", "cases", "result", "detail"]);
    for o in &outcomes {
        t.row(vec![
            o.name.into(),
            o.cases.to_string(),
            if o.passed { "PASS" } else { "FAIL" }.into(),
            o.detail.clone(),
        ]);
    }
    // Timings vary between runs, so they stay out of the output.
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    let json = json!({
        "seed": a.seed,
        "checks": outcomes.iter().map(|o| json!({
            "name": o.name, "cases": o.cases, "passed": o.passed, "detail": o.detail,
        })).collect::<Vec<_>>(),
    });
    ctx.emit(&a.out, manifest, t.render(), json)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed checks: {}", failed.join(", "))))
    }
}
