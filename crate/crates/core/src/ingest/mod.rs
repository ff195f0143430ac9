// SPDX-License-Identifier: Apache-2.0

//! File formats and data preparation.
//!
//! All tabular inputs are UTF-8 comma-separated files with a header row;
//! lines starting with `#` are ignored.

mod countries;
mod indicators;
mod json;
mod ratings;
mod tables;
mod trade;

use thiserror::Error;

use crate::graph::GraphError;

pub use countries::{CountryCodes, DROP};
pub use indicators::{
    intrinsic_harm_topk_worst, intrinsic_harms, normalize_indicator, read_indicator_specs,
    read_indicator_table, IndicatorSpec, IndicatorTable, IntrinsicHarms, IntrinsicOptions,
};
pub use json::{GraphDocument, JsonNode};
pub use ratings::{harm_from_rating, Rating, RatingScale};
pub use tables::{
    load_graph, read_alias_map, read_edges, read_graph, read_nodes, write_edges_csv,
    write_nodes_csv, EdgeRow, NodeRow,
};
pub use trade::{
    build_trade_network, normalize_trade_flows, prune_trade_network, read_trade_flows, PruneMode,
    TradeFlowRecord, DEFAULT_THRESHOLD_USD,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}:{line}:{column}: {reason}")]
    Parse {
        file: String,
        line: u64,
        column: usize,
        reason: String,
    },
    #[error("{file}{}: {error}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Constraint {
        file: String,
        line: Option<u64>,
        error: GraphError,
    },
    #[error("rating {score} is outside the scale [{min}, {max}]")]
    OutOfScale { score: f64, min: f64, max: f64 },
    #[error("unknown grade `{0}`")]
    UnknownGrade(String),
    #[error("invalid rating scale: {0}")]
    InvalidScale(String),
    #[error("indicator `{0}` needs at least two distinct values")]
    DegenerateIndicator(String),
    #[error("entity `{entity}` has no value for indicator `{indicator}`")]
    MissingIndicator { entity: String, indicator: String },
    #[error("top-k count must be between 1 and {available}, got {k}")]
    InvalidK { k: usize, available: usize },
    #[error("several entities map to `{code}` with a value for `{indicator}`")]
    EntityCollision { code: String, indicator: String },
    #[error("unmapped country labels: {}", .0.join(", "))]
    UnmappedCountries(Vec<String>),
    #[error("invalid graph document: {0}")]
    Json(String),
}

impl IngestError {
    pub(crate) fn parse(source: &str, line: u64, column: usize, reason: impl Into<String>) -> Self {
        IngestError::Parse {
            file: source.to_string(),
            line,
            column,
            reason: reason.into(),
        }
    }
}
