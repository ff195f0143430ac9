// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::IngestError;
use crate::graph::{GraphError, HarmGraph, NodeSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRow {
    pub line: u64,
    pub label: String,
    pub harm: f64,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRow {
    pub line: u64,
    pub src: String,
    pub dst: String,
}

/// A parsed CSV record with its 1-based line number.
pub(crate) struct Record {
    pub line: u64,
    pub fields: Vec<String>,
}

/// Reads a headed CSV and returns, for each record, the fields for the
/// `required` columns followed by `optional` ones (empty when absent).
pub(crate) fn read_table(
    text: &str,
    source: &str,
    required: &[&str],
    optional: &[&str],
) -> Result<Vec<Record>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::parse(source, 1, 1, e.to_string()))?
        .clone();
    let header_line = text
        .lines()
        .position(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map_or(1, |i| i as u64 + 1);
    if headers.is_empty() {
        return Err(IngestError::parse(source, 1, 1, "missing header row"));
    }
    let position = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut columns = Vec::new();
    for name in required {
        let idx = position(name).ok_or_else(|| {
            IngestError::parse(
                source,
                header_line,
                1,
                format!(
                    "header must contain `{}`, found `{}`",
                    required.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            )
        })?;
        columns.push(Some(idx));
    }
    columns.extend(optional.iter().map(|n| position(n)));

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            IngestError::parse(source, line, 1, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let mut fields = Vec::with_capacity(columns.len());
        for (k, col) in columns.iter().enumerate() {
            match col.and_then(|c| rec.get(c)) {
                Some(v) => fields.push(v.to_string()),
                None if k < required.len() => {
                    return Err(IngestError::parse(
                        source,
                        line,
                        col.unwrap_or(0) + 1,
                        format!("missing `{}` field", required[k]),
                    ))
                }
                None => fields.push(String::new()),
            }
        }
        out.push(Record { line, fields });
    }
    Ok(out)
}

/// 1-based header position of `name`, for error reporting only.
pub(crate) fn column_of(text: &str, name: &str) -> usize {
    text.lines()
        .find(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .and_then(|h| h.split(',').position(|c| c.trim().eq_ignore_ascii_case(name)))
        .map_or(1, |i| i + 1)
}

/// Parses a `label,harm[,name]` node table.
pub fn read_nodes(text: &str, source: &str) -> Result<Vec<NodeRow>, IngestError> {
    let harm_col = column_of(text, "harm");
    let label_col = column_of(text, "label");
    let mut seen = HashSet::new();
    read_table(text, source, &["label", "harm"], &["name"])?
        .into_iter()
        .map(|r| {
            let mut f = r.fields.into_iter();
            let (label, harm, name) = (f.next().unwrap(), f.next().unwrap(), f.next().unwrap());
            if label.is_empty() {
                return Err(IngestError::parse(source, r.line, label_col, "empty label"));
            }
            let harm: f64 = harm.parse().map_err(|_| {
                IngestError::parse(source, r.line, harm_col, format!("invalid harm `{harm}`"))
            })?;
            if !(harm.is_finite() && (0.0..=100.0).contains(&harm)) {
                return Err(IngestError::Constraint {
                    file: source.to_string(),
                    line: Some(r.line),
                    error: GraphError::HarmOutOfRange { label, value: harm },
                });
            }
            if !seen.insert(label.clone()) {
                return Err(IngestError::Constraint {
                    file: source.to_string(),
                    line: Some(r.line),
                    error: GraphError::DuplicateNode(label),
                });
            }
            Ok(NodeRow {
                line: r.line,
                label,
                harm,
                name: (!name.is_empty()).then_some(name),
            })
        })
        .collect()
}

/// Parses a `src,dst` edge table.
pub fn read_edges(text: &str, source: &str) -> Result<Vec<EdgeRow>, IngestError> {
    let src_col = column_of(text, "src");
    let dst_col = column_of(text, "dst");
    read_table(text, source, &["src", "dst"], &[])?
        .into_iter()
        .map(|r| {
            let mut f = r.fields.into_iter();
            let (src, dst) = (f.next().unwrap(), f.next().unwrap());
            if src.is_empty() {
                return Err(IngestError::parse(source, r.line, src_col, "empty source label"));
            }
            if dst.is_empty() {
                return Err(IngestError::parse(source, r.line, dst_col, "empty destination label"));
            }
            Ok(EdgeRow {
                line: r.line,
                src,
                dst,
            })
        })
        .collect()
}

/// Builds a graph from node and edge table text.
pub fn read_graph(
    nodes_text: &str,
    nodes_source: &str,
    edges_text: &str,
    edges_source: &str,
) -> Result<HarmGraph, IngestError> {
    let nodes = read_nodes(nodes_text, nodes_source)?;
    let edges = read_edges(edges_text, edges_source)?;
    let labels: HashSet<&str> = nodes.iter().map(|n| n.label.as_str()).collect();
    for e in &edges {
        for end in [&e.src, &e.dst] {
            if !labels.contains(end.as_str()) {
                return Err(IngestError::Constraint {
                    file: edges_source.to_string(),
                    line: Some(e.line),
                    error: GraphError::UnknownEndpoint(end.clone()),
                });
            }
        }
        if e.src == e.dst {
            return Err(IngestError::Constraint {
                file: edges_source.to_string(),
                line: Some(e.line),
                error: GraphError::SelfLoop(e.src.clone()),
            });
        }
    }
    HarmGraph::build(
        nodes.into_iter().map(|n| NodeSpec {
            label: n.label,
            harm: n.harm,
            name: n.name,
        }),
        edges.into_iter().map(|e| (e.src, e.dst)),
    )
    .map_err(|error| IngestError::Constraint {
        file: nodes_source.to_string(),
        line: None,
        error,
    })
}

pub(crate) fn read_file(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Loads a graph from a node file and an edge file.
pub fn load_graph(node_file: &Path, edge_file: &Path) -> Result<HarmGraph, IngestError> {
    let nodes = read_file(node_file)?;
    let edges = read_file(edge_file)?;
    read_graph(
        &nodes,
        &node_file.display().to_string(),
        &edges,
        &edge_file.display().to_string(),
    )
}

/// Parses an `alias,canonical` table into a lookup map.
pub fn read_alias_map(text: &str, source: &str) -> Result<HashMap<String, String>, IngestError> {
    read_table(text, source, &["alias", "canonical"], &[])?
        .into_iter()
        .map(|r| {
            let mut f = r.fields.into_iter();
            Ok((f.next().unwrap(), f.next().unwrap()))
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with('#') || s != s.trim() {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Node table for `g`, in id order. Includes a `name` column only when some
/// node has a display name.
pub fn write_nodes_csv(g: &HarmGraph) -> String {
    let with_names = g.nodes().any(|v| g.name(v).is_some());
    let mut out = String::from(if with_names { "label,harm,name\n" } else { "label,harm\n" });
    for v in g.nodes() {
        let _ = write!(out, "{},{}", csv_field(g.label(v)), g.harm(v));
        if with_names {
            let _ = write!(out, ",{}", csv_field(g.name(v).unwrap_or("")));
        }
        out.push('\n');
    }
    out
}

/// Edge table for `g`, in ascending id order.
pub fn write_edges_csv(g: &HarmGraph) -> String {
    let mut out = String::from("src,dst\n");
    for (s, d) in g.edges() {
        let _ = writeln!(out, "{},{}", csv_field(g.label(s)), csv_field(g.label(d)));
    }
    out
}
