// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use harmnet_core::HarmGraph;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// A generated graph kept as raw data so oracles never go through the
/// library's own adjacency structures.
#[derive(Debug, Clone)]
pub struct Raw {
    pub n: usize,
    pub harms: Vec<f64>,
    pub edges: Vec<(usize, usize)>,
}

impl Raw {
    pub fn graph(&self) -> HarmGraph {
        HarmGraph::build(
            (0..self.n).map(|i| (format!("v{i}"), self.harms[i])),
            self.edges.iter().map(|&(u, v)| (format!("v{u}"), format!("v{v}"))),
        )
        .unwrap()
    }

    /// `adj[(u, v)] = 1` iff `u -> v`.
    pub fn adj(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
        }
        a
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    /// Transitive closure by Floyd-Warshall, reflexive.
    pub fn reach(&self) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(u, v) in &self.edges {
            r[u][v] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        r
    }
}

fn harm() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u8..=100).prop_map(f64::from),
        0.0f64..=100.0,
        Just(0.0),
        Just(100.0),
    ]
}

/// Random digraph, `1..=max_n` nodes, each ordered pair an edge with
/// probability `p`. With `acyclic`, edges only go from higher to lower ids.
pub fn raw(max_n: usize, p: f64, acyclic: bool) -> impl Strategy<Value = Raw> {
    (1..=max_n).prop_flat_map(move |n| {
        (
            proptest::collection::vec(harm(), n),
            proptest::collection::vec(proptest::bool::weighted(p), n * n),
        )
            .prop_map(move |(harms, bits)| {
                let edges = (0..n)
                    .flat_map(|u| (0..n).map(move |v| (u, v)))
                    .filter(|&(u, v)| u != v && bits[u * n + v] && (!acyclic || u > v))
                    .collect();
                Raw { n, harms, edges }
            })
    })
}

/// Random rooted in-tree on `1..=max_n` nodes with edges pointing to the
/// root (node 0): every node but the root supplies exactly one parent.
pub fn in_tree(max_n: usize) -> impl Strategy<Value = Raw> {
    (1..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec(harm(), n),
            proptest::collection::vec(any::<proptest::sample::Index>(), n),
        )
            .prop_map(move |(harms, parents)| {
                let edges = (1..n).map(|v| (v, parents[v].index(v))).collect();
                Raw { n, harms, edges }
            })
    })
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
