// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use harmnet_core::ingest::{
    build_trade_network, intrinsic_harms, normalize_trade_flows, prune_trade_network, read_alias_map,
    read_indicator_specs, read_indicator_table, read_trade_flows, write_edges_csv, write_nodes_csv,
    CountryCodes, GraphDocument, IntrinsicOptions,
};
use harmnet_core::metrics::network_harm_all;
use harmnet_core::whatif::InfluenceMatrix;
use serde::Serialize;
use serde_json::json;

use crate::args::TradeArgs;
use crate::render::{csv_line, num, Table};
use crate::{json_with_manifest, read_file, write_file, CliError, CliResult, Ctx};

#[derive(Debug, Serialize)]
struct CountryScore {
    country: String,
    h: f64,
    #[serde(rename = "H")]
    network: f64,
    gi: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    year: i32,
    threshold_usd: f64,
    prune_mode: String,
    countries: usize,
    edges: usize,
    /// Countries with too few indicators to score.
    excluded: Vec<String>,
    kept: usize,
    kept_edges: usize,
}

pub(crate) fn run(ctx: &mut Ctx, a: &TradeArgs) -> CliResult<()> {
    let path_str = |p: &std::path::Path| p.display().to_string();
    let flows_src = path_str(&a.flows);
    let records = read_trade_flows(&read_file(&a.flows)?, &flows_src)?;
    let codes = match &a.aliases {
        Some(p) => CountryCodes::with_aliases(read_alias_map(&read_file(p)?, &path_str(p))?)?,
        None => CountryCodes::new(),
    };
    let records = normalize_trade_flows(&records, &codes)?;
    if !records.iter().any(|r| r.year == a.year) {
        return Err(CliError::Data(format!("{flows_src}: no flows for year {}", a.year)));
    }
    let table = read_indicator_table(&read_file(&a.indicators)?, &path_str(&a.indicators))?
        .to_country_codes(&codes)?;
    let specs = read_indicator_specs(&read_file(&a.specs)?, &path_str(&a.specs))?;
    let opts = IntrinsicOptions {
        k: a.k,
        allow_partial: a.allow_partial,
    };
    let intrinsic = intrinsic_harms(&table, &specs, opts).map_err(|e| match e {
        harmnet_core::ingest::IngestError::InvalidK { .. } => CliError::Usage(format!("--k: {e}")),
        other => other.into(),
    })?;

    let network = build_trade_network(&records, a.year, a.threshold);
    let pruned = prune_trade_network(&network, &intrinsic.harms, a.prune_mode);
    let in_network: BTreeSet<&str> = network.nodes().map(|v| network.label(v)).collect();
    let summary = Summary {
        year: a.year,
        threshold_usd: a.threshold,
        prune_mode: a.prune_mode.to_string(),
        countries: network.node_count(),
        edges: network.edge_count(),
        excluded: in_network
            .iter()
            .filter(|c| !intrinsic.harms.contains_key(**c))
            .map(|c| c.to_string())
            .collect(),
        kept: pruned.node_count(),
        kept_edges: pruned.edge_count(),
    };
    if pruned.node_count() == 0 {
        return Err(CliError::Data(format!(
            "pruning left no countries ({} in flows, {} without indicator data)",
            summary.countries,
            summary.excluded.len()
        )));
    }

    let cfg = a.config.config();
    let network_h = network_harm_all(&pruned, &cfg)?;
    let gi = InfluenceMatrix::compute(&pruned, &cfg)?.global();
    let scores: Vec<CountryScore> = pruned
        .nodes()
        .map(|v| CountryScore {
            country: pruned.label(v).to_string(),
            h: pruned.harm(v),
            network: network_h[v.index()],
            gi: gi[v.index()],
        })
        .collect();

    let mut manifest = ctx.manifest("trade");
    manifest.config = Some(cfg);
    manifest.inputs = std::iter::once(&a.flows)
        .chain([&a.indicators, &a.specs])
        .chain(a.aliases.as_ref())
        .map(|p| path_str(p))
        .collect();
    let out = |name: &str| a.out_dir.join(name);
    let header = |name: &str| manifest.with_output(Some(path_str(&out(name)))).comment();

    write_file(&out("nodes.csv"), &format!("{}{}", header("nodes.csv"), write_nodes_csv(&pruned)))?;
    write_file(&out("edges.csv"), &format!("{}{}", header("edges.csv"), write_edges_csv(&pruned)))?;

    let mut csv = header("scores.csv");
    csv.push_str("country,h,H,GI\n");
    for s in &scores {
        csv.push_str(&csv_line(&[s.country.clone(), num(s.h), num(s.network), num(s.gi)]));
    }
    write_file(&out("scores.csv"), &csv)?;

    let mut ranked: Vec<&CountryScore> = scores.iter().collect();
    ranked.sort_by(|x, y| y.gi.abs().total_cmp(&x.gi.abs()).then_with(|| x.country.cmp(&y.country)));
    let mut csv = header("influence.csv");
    csv.push_str("rank,country,GI\n");
    for (i, s) in ranked.iter().enumerate() {
        csv.push_str(&csv_line(&[(i + 1).to_string(), s.country.clone(), num(s.gi)]));
    }
    write_file(&out("influence.csv"), &csv)?;

    let doc = json!({
        "graph": GraphDocument::from_graph(&pruned),
        "scores": scores,
        "summary": summary,
    });
    let m = manifest.with_output(Some(path_str(&out("network.json"))));
    write_file(&out("network.json"), &json_with_manifest(&m, doc))?;

    let mut t = Table::new(["country", "h", "H", "GI"]);
    for s in &scores {
        t.row(vec![s.country.clone(), num(s.h), num(s.network), num(s.gi)]);
    }
    let excluded = if summary.excluded.is_empty() {
        "-".to_string()
    } else {
        summary.excluded.join(" ")
    };
    ctx.print(&format!(
        "year {}  threshold {}  prune {}\ncountries {}  edges {}  without indicators {} ({excluded})\nkept {}  kept edges {}\n\n{}wrote {}\n",
        summary.year,
        summary.threshold_usd,
        summary.prune_mode,
        summary.countries,
        summary.edges,
        summary.excluded.len(),
        summary.kept,
        summary.kept_edges,
        t.render(),
        a.out_dir.display()
    ))
}
