// SPDX-License-Identifier: Apache-2.0

//! Classic Alpha-Centrality and personalized PageRank, and the check that
//! sum/sum network harm over all walks is the Alpha-Centrality level sum.
//!
//! Adjacency convention: `A[i][j] = 1` iff `j -> i` (j supplies i), so
//! `(A x)_i` sums over the suppliers of `i`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, HarmGraph, NodeId};
use crate::metrics::{network_harm, Aggregator, HarmConfig, MetricsError};
use crate::paths::PathScheme;

const ABS_TOL: f64 = 1e-10;
const MAX_ITER: usize = 100_000;
const DENSE_FALLBACK_NODES: usize = 2_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CentralityError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("alpha {alpha} must be below 1/lambda_max = {limit}")]
    AlphaTooLarge { alpha: f64, limit: f64 },
    #[error("alpha must be non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("personalization vector has {got} entries, graph has {expected} nodes")]
    Dimension { expected: usize, got: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Per-node scores in id order.
pub type CentralityVector = Vec<f64>;

/// Dense adjacency with rows indexed by receiving node.
pub fn adjacency_in(g: &HarmGraph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut a = DMatrix::zeros(n, n);
    for (s, d) in g.edges() {
        a[(d.index(), s.index())] = 1.0;
    }
    a
}

fn check_beta(g: &HarmGraph, beta: &[f64]) -> Result<(), CentralityError> {
    if beta.len() != g.node_count() {
        return Err(CentralityError::Dimension {
            expected: g.node_count(),
            got: beta.len(),
        });
    }
    Ok(())
}

/// Solves `x = alpha * M x + (1 - alpha) beta` where `M x` is given by
/// `apply`. Falls back to a dense solve of `(I - alpha M) x = (1 - alpha) beta`
/// on small graphs when iteration stalls.
fn fixed_point(
    g: &HarmGraph,
    alpha: f64,
    beta: &[f64],
    apply: impl Fn(&[f64], &mut [f64]),
    dense: impl Fn() -> DMatrix<f64>,
) -> Result<CentralityVector, CentralityError> {
    let n = g.node_count();
    let mut x = beta.to_vec();
    let mut mx = vec![0.0; n];
    for _ in 0..MAX_ITER {
        apply(&x, &mut mx);
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let next = alpha * mx[i] + (1.0 - alpha) * beta[i];
            delta = delta.max((next - x[i]).abs());
            x[i] = next;
        }
        if delta < ABS_TOL {
            return Ok(x);
        }
    }
    if n < DENSE_FALLBACK_NODES {
        let m = DMatrix::identity(n, n) - dense() * alpha;
        let rhs = DVector::from_iterator(n, beta.iter().map(|b| (1.0 - alpha) * b));
        if let Some(sol) = m.lu().solve(&rhs) {
            return Ok(sol.iter().copied().collect());
        }
    }
    Err(CentralityError::NoConvergence(MAX_ITER))
}

/// Alpha-Centrality `x = alpha A x + (1 - alpha) beta`.
pub fn alpha_centrality(
    g: &HarmGraph,
    alpha: f64,
    beta: &[f64],
) -> Result<CentralityVector, CentralityError> {
    check_beta(g, beta)?;
    if alpha < 0.0 {
        return Err(CentralityError::NegativeAlpha(alpha));
    }
    if g.is_empty() {
        return Ok(Vec::new());
    }
    let radius = g.spectral_radius_estimate()?.value;
    if alpha * radius >= 1.0 {
        return Err(CentralityError::AlphaTooLarge {
            alpha,
            limit: 1.0 / radius,
        });
    }
    fixed_point(
        g,
        alpha,
        beta,
        |x, out| {
            for v in g.nodes() {
                out[v.index()] = g.in_neighbors(v).unwrap().iter().map(|u| x[u.index()]).sum();
            }
        },
        || adjacency_in(g),
    )
}

/// Personalized PageRank with `P[i][j] = A[i][j] / k_out(j)`. Columns of
/// nodes without out-links stay zero; mass is not teleported.
pub fn pagerank_personalized(
    g: &HarmGraph,
    alpha: f64,
    beta: &[f64],
) -> Result<CentralityVector, CentralityError> {
    check_beta(g, beta)?;
    if alpha < 0.0 {
        return Err(CentralityError::NegativeAlpha(alpha));
    }
    if alpha >= 1.0 {
        return Err(CentralityError::AlphaTooLarge { alpha, limit: 1.0 });
    }
    let inv_out: Vec<f64> = g
        .nodes()
        .map(|v| match g.out_degree(v) {
            0 => 0.0,
            k => 1.0 / k as f64,
        })
        .collect();
    fixed_point(
        g,
        alpha,
        beta,
        |x, out| {
            for v in g.nodes() {
                out[v.index()] = g
                    .in_neighbors(v)
                    .unwrap()
                    .iter()
                    .map(|u| x[u.index()] * inv_out[u.index()])
                    .sum();
            }
        },
        || {
            let mut p = adjacency_in(g);
            for (j, w) in inv_out.iter().enumerate() {
                p.column_mut(j).scale_mut(*w);
            }
            p
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionRow {
    pub node: NodeId,
    /// Sum/sum network harm over all walks.
    pub network_harm: f64,
    /// `(1/alpha) * sum_{j != a} [(I - alpha A)^-1]_{aj} h(j)`.
    pub closed_form: f64,
    /// `(1/alpha) * ([(I - alpha A)^-1 h]_a - h(a))`, which also counts closed
    /// walks back to the target.
    pub closed_form_with_self: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub alpha: f64,
    pub m_max: usize,
    pub spectral_radius: f64,
    pub rows: Vec<ReductionRow>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Tolerance applied by [`verify_reduction`].
pub const REDUCTION_TOL: f64 = 1e-6;

/// Checks that `H_{sum,sum}(a; all walks)` equals the resolvent closed form
/// for every node `a`.
///
/// The target never counts as its own origin, so the closed form drops the
/// `j = a` column. When `a` lies on no cycle, or `h(a) = 0`, it coincides with
/// `closed_form_with_self`.
pub fn verify_reduction(
    g: &HarmGraph,
    alpha: f64,
    m_max: usize,
) -> Result<ReductionReport, CentralityError> {
    let radius = g.spectral_radius_estimate()?.value;
    if !(alpha > 0.0 && alpha * radius < 1.0) {
        return Err(CentralityError::AlphaTooLarge {
            alpha,
            limit: 1.0 / radius,
        });
    }
    if (alpha * radius).powi(m_max as i32) >= 1e-10 {
        return Err(CentralityError::Precondition(format!(
            "(alpha * lambda)^m_max = {} is not below 1e-10",
            (alpha * radius).powi(m_max as i32)
        )));
    }
    // The nilpotent part of A contributes terms up to length n - 1.
    if m_max + 1 < g.node_count() {
        return Err(CentralityError::Precondition(format!(
            "m_max {m_max} is shorter than the longest possible acyclic path"
        )));
    }

    let n = g.node_count();
    let resolvent = (DMatrix::identity(n, n) - adjacency_in(g) * alpha)
        .try_inverse()
        .ok_or_else(|| CentralityError::Precondition("I - alpha A is singular".into()))?;
    let h = g.harms();
    let cfg = HarmConfig::new(Aggregator::Sum, Aggregator::Sum, alpha)
        .with_scheme(PathScheme::AllPaths)
    .with_m_max(m_max);

    let mut rows = Vec::with_capacity(n);
    let mut max_deviation: f64 = 0.0;
    for a in g.nodes() {
        let i = a.index();
        let network = network_harm(g, a, &cfg)?;
        let others: f64 = (0..n).filter(|&j| j != i).map(|j| resolvent[(i, j)] * h[j]).sum();
        let all: f64 = (0..n).map(|j| resolvent[(i, j)] * h[j]).sum();
        let row = ReductionRow {
            node: a,
            network_harm: network,
            closed_form: others / alpha,
            closed_form_with_self: (all - h[i]) / alpha,
        };
        max_deviation = max_deviation.max((row.network_harm - row.closed_form).abs());
        rows.push(row);
    }
    Ok(ReductionReport {
        alpha,
        m_max,
        spectral_radius: radius,
        rows,
        max_deviation,
        passed: max_deviation < REDUCTION_TOL,
    })
}
