// SPDX-License-Identifier: Apache-2.0

//! Library results against independent brute-force or dense-algebra oracles.

mod common;

use std::collections::BTreeSet;

use common::{close, raw, Raw};
use harmnet_core::centrality::{alpha_centrality, pagerank_personalized, verify_reduction};
use harmnet_core::metrics::{level_harms, Aggregator};
use harmnet_core::paths::oracle::{collapse, enumerate_paths};
use harmnet_core::{decompose, Direction, NodeId, PathScheme};
use nalgebra::{Complex, DMatrix, DVector, Schur};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(200)
}

fn mat_pow(a: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let mut p = DMatrix::identity(a.nrows(), a.ncols());
    for _ in 0..m {
        p = &p * a;
    }
    p
}

/// Walk count from `j` to `a` (upstream) or `a` to `j` (downstream).
fn walks(pw: &DMatrix<f64>, a: usize, j: usize, dir: Direction) -> f64 {
    match dir {
        Direction::Upstream => pw[(j, a)],
        Direction::Downstream => pw[(a, j)],
    }
}

fn k_core_oracle(r: &Raw, k: usize) -> BTreeSet<usize> {
    let mut alive: BTreeSet<usize> = (0..r.n).collect();
    loop {
        let drop: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|&v| {
                alive
                    .iter()
                    .filter(|&&u| u != v && (r.has_edge(u, v) || r.has_edge(v, u)))
                    .count()
                    < k
            })
            .collect();
        if drop.is_empty() {
            return alive;
        }
        for v in drop {
            alive.remove(&v);
        }
    }
}

/// Largest eigenvalue modulus over strongly connected components, each
/// computed by a dense Schur decomposition of the component's submatrix.
fn spectral_oracle(r: &Raw) -> f64 {
    let reach = r.reach();
    let adj = r.adj();
    let mut seen = vec![false; r.n];
    let mut best: f64 = 0.0;
    for i in 0..r.n {
        if seen[i] {
            continue;
        }
        let comp: Vec<usize> = (0..r.n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &comp {
            seen[j] = true;
        }
        if comp.len() < 2 {
            continue;
        }
        // Unshifted QR can stall on permutation-like blocks, so factor
        // `B + cI` and shift the eigenvalues back.
        let shift = 0.37;
        let sub = DMatrix::from_fn(comp.len(), comp.len(), |x, y| {
            adj[(comp[x], comp[y])] + if x == y { shift } else { 0.0 }
        });
        let schur = Schur::try_new(sub, 1e-14, 100_000).expect("Schur converges");
        for ev in schur.complex_eigenvalues().iter() {
            best = best.max((ev - Complex::new(shift, 0.0)).norm());
        }
    }
    best
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn neighbors_match_matrix_scan(r in raw(8, 0.3, false)) {
        let g = r.graph();
        let adj = r.adj();
        for v in 0..r.n {
            let id = NodeId(v as u32);
            let ins: Vec<usize> = g.in_neighbors(id).unwrap().iter().map(|u| u.index()).collect();
            let outs: Vec<usize> = g.out_neighbors(id).unwrap().iter().map(|u| u.index()).collect();
            let col: Vec<usize> = (0..r.n).filter(|&u| adj[(u, v)] != 0.0).collect();
            let row: Vec<usize> = (0..r.n).filter(|&u| adj[(v, u)] != 0.0).collect();
            prop_assert_eq!(ins, col);
            prop_assert_eq!(outs, row);
        }
    }

    #[test]
    fn k_core_matches_peeling(r in raw(12, 0.3, false), k in 1usize..5) {
        let core = r.graph().k_core(k);
        let got: BTreeSet<usize> = core
            .nodes()
            .map(|v| core.label(v)[1..].parse().unwrap())
            .collect();
        prop_assert_eq!(got, k_core_oracle(&r, k));
    }

    #[test]
    fn spectral_radius_matches_eigensolver(r in raw(8, 0.3, false)) {
        let est = r.graph().spectral_radius_estimate().unwrap();
        let oracle = spectral_oracle(&r);
        prop_assert!(!est.approximate);
        prop_assert!((est.value - oracle).abs() < 1e-6, "estimate {} oracle {}", est.value, oracle);
    }

    #[test]
    fn walk_multiplicities_are_matrix_powers(r in raw(8, 0.3, false), m_max in 1usize..=6) {
        let g = r.graph();
        let adj = r.adj();
        let powers: Vec<DMatrix<f64>> = (0..=m_max).map(|m| mat_pow(&adj, m)).collect();
        for dir in [Direction::Upstream, Direction::Downstream] {
            for a in 0..r.n {
                let dec = decompose(&g, NodeId(a as u32), dir, PathScheme::AllPaths, m_max).unwrap();
                for m in 1..=m_max {
                    for j in 0..r.n {
                        let expect = if j == a { 0.0 } else { walks(&powers[m], a, j, dir) };
                        let got = dec.level(m).multiplicity(NodeId(j as u32)) as f64;
                        prop_assert_eq!(got, expect, "a={} j={} m={}", a, j, m);
                    }
                }
            }
        }
    }

    #[test]
    fn shortest_multiplicities_match_first_nonzero_power(r in raw(8, 0.35, false)) {
        let g = r.graph();
        let adj = r.adj();
        let m_max = r.n.max(2) - 1;
        let powers: Vec<DMatrix<f64>> = (0..=m_max).map(|m| mat_pow(&adj, m)).collect();
        for a in 0..r.n {
            let all = decompose(&g, NodeId(a as u32), Direction::Upstream, PathScheme::AllShortestPaths, m_max).unwrap();
            let one = decompose(&g, NodeId(a as u32), Direction::Upstream, PathScheme::SingleShortestPath, m_max).unwrap();
            for j in (0..r.n).filter(|&j| j != a) {
                let dist = (1..=m_max).find(|&m| powers[m][(j, a)] > 0.0);
                for m in 1..=m_max {
                    let id = NodeId(j as u32);
                    let (want_all, want_one) = match dist {
                        Some(d) if d == m => (powers[m][(j, a)], 1.0),
                        _ => (0.0, 0.0),
                    };
                    prop_assert_eq!(all.level(m).multiplicity(id) as f64, want_all);
                    prop_assert_eq!(one.level(m).multiplicity(id) as f64, want_one);
                }
            }
        }
    }

    #[test]
    fn decompose_matches_enumeration(r in raw(8, 0.3, false), m_max in 1usize..=6) {
        let g = r.graph();
        for scheme in PathScheme::ALL {
            for dir in [Direction::Upstream, Direction::Downstream] {
                for a in g.nodes() {
                    let paths = enumerate_paths(&g, a, dir, scheme, m_max).unwrap();
                    let want = collapse(&paths, a, dir, scheme, m_max);
                    let got = decompose(&g, a, dir, scheme, m_max).unwrap();
                    prop_assert_eq!(got, want, "scheme {} dir {:?} target {}", scheme, dir, a);
                }
            }
        }
    }

    #[test]
    fn summed_levels_are_weighted_matrix_powers(r in raw(8, 0.3, false), m_max in 1usize..=5) {
        let g = r.graph();
        let adj = r.adj();
        for a in 0..r.n {
            let dec = decompose(&g, NodeId(a as u32), Direction::Upstream, PathScheme::AllPaths, m_max).unwrap();
            let lh = level_harms(&dec, g.harms(), Aggregator::Sum).unwrap();
            for m in 1..=m_max {
                let pw = mat_pow(&adj, m);
                let want: f64 = (0..r.n).filter(|&j| j != a).map(|j| pw[(j, a)] * r.harms[j]).sum();
                match lh.values[m - 1] {
                    Some(x) => prop_assert!(close(x, want, 1e-12)),
                    None => prop_assert_eq!(want, 0.0),
                }
            }
        }
    }

    #[test]
    fn alpha_centrality_matches_dense_solve(
        r in raw(8, 0.3, false),
        frac in 0.05f64..0.95,
        beta in proptest::collection::vec(0.0f64..10.0, 8),
    ) {
        let g = r.graph();
        let lambda = g.spectral_radius_estimate().unwrap().value;
        let alpha = if lambda > 0.0 { frac / lambda } else { frac };
        let beta = &beta[..r.n];
        let x = alpha_centrality(&g, alpha, beta).unwrap();
        let a_in = r.adj().transpose();
        let m = DMatrix::identity(r.n, r.n) - a_in * alpha;
        let rhs = DVector::from_iterator(r.n, beta.iter().map(|b| (1.0 - alpha) * b));
        let want = m.lu().solve(&rhs).unwrap();
        for i in 0..r.n {
            prop_assert!((x[i] - want[i]).abs() < 1e-8, "node {}: {} vs {}", i, x[i], want[i]);
        }
    }

    #[test]
    fn pagerank_matches_dense_solve(
        r in raw(8, 0.45, false),
        alpha in 0.0f64..0.95,
        beta in proptest::collection::vec(0.0f64..1.0, 8),
    ) {
        let outdeg: Vec<usize> = (0..r.n).map(|u| r.edges.iter().filter(|e| e.0 == u).count()).collect();
        prop_assume!(outdeg.iter().all(|&d| d > 0));
        let g = r.graph();
        let beta = &beta[..r.n];
        let x = pagerank_personalized(&g, alpha, beta).unwrap();
        let p = DMatrix::from_fn(r.n, r.n, |i, j| if r.has_edge(j, i) { 1.0 / outdeg[j] as f64 } else { 0.0 });
        let m = DMatrix::identity(r.n, r.n) - p * alpha;
        let rhs = DVector::from_iterator(r.n, beta.iter().map(|b| (1.0 - alpha) * b));
        let want = m.lu().solve(&rhs).unwrap();
        for i in 0..r.n {
            prop_assert!((x[i] - want[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn reduction_holds_on_dags(r in raw(8, 0.4, true)) {
        let g = r.graph();
        let report = verify_reduction(&g, 0.5, r.n.max(1)).unwrap();
        prop_assert!(report.passed, "max deviation {}", report.max_deviation);
        for row in &report.rows {
            // No cycles, so the literal resolvent form agrees too.
            prop_assert!((row.closed_form - row.closed_form_with_self).abs() < 1e-9);
        }
    }

    #[test]
    fn reduction_holds_on_digraphs(r in raw(8, 0.3, false)) {
        let g = r.graph();
        let lambda = g.spectral_radius_estimate().unwrap().value;
        let alpha = if lambda > 0.0 { 0.5 / lambda } else { 0.5 };
        let report = verify_reduction(&g, alpha, 60).unwrap();
        prop_assert!(report.passed, "max deviation {}", report.max_deviation);
    }
}

#[test]
fn three_node_path_series_by_hand() {
    // c -> b -> a with h = (a 0, b 0, c 100): only the length-2 walk from c
    // contributes, weighted alpha^1 = 0.5.
    let g = harmnet_core::HarmGraph::build([("a", 0.0), ("b", 0.0), ("c", 100.0)], [("c", "b"), ("b", "a")]).unwrap();
    let report = verify_reduction(&g, 0.5, 3).unwrap();
    let row = &report.rows[0];
    assert!((row.network_harm - 50.0).abs() < 1e-12);
    assert!((row.closed_form - 50.0).abs() < 1e-9);
    assert!(report.passed);
}
