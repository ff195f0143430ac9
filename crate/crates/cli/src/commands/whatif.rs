// SPDX-License-Identifier: Apache-2.0

use harmnet_core::whatif::{global_report, rank_report, scored_with, InfluenceReport, ScenarioOverlay};
use harmnet_core::{HarmGraph, NodeId};
use serde::Serialize;
use serde_json::json;

use crate::args::WhatifArgs;
use crate::render::{num, Table};
use crate::{load, resolve, CliError, CliResult, Ctx};

#[derive(Debug, Serialize)]
struct Edit {
    node: String,
    action: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    harm: Option<f64>,
}

/// Counterfactual result. `kind` is `vulnerability` for a single override to
/// 100, `influence` for a single removal, `scenario` otherwise.
#[derive(Debug, Serialize)]
struct Scenario {
    kind: &'static str,
    target: String,
    edits: Vec<Edit>,
    baseline: f64,
    scenario: f64,
    delta: f64,
}

fn parse_perturb(g: &HarmGraph, spec: &str) -> CliResult<(NodeId, f64)> {
    let (label, harm) = match spec.rsplit_once('=') {
        Some((l, h)) => {
            let h: f64 = h
                .parse()
                .ok()
                .filter(|h: &f64| (0.0..=100.0).contains(h))
                .ok_or_else(|| CliError::Usage(format!("--perturb: harm `{h}` is not in [0, 100]")))?;
            (l, h)
        }
        None => (spec, 100.0),
    };
    Ok((resolve(g, label, "--perturb")?, harm))
}

pub(crate) fn ranking_table(g: &HarmGraph, r: &InfluenceReport) -> String {
    let mut t = Table::new(["rank", "node", "name", "score"]);
    for (i, e) in r.entries.iter().enumerate() {
        t.row(vec![
            (i + 1).to_string(),
            e.label.clone(),
            g.name(e.node).unwrap_or("").to_string(),
            num(e.score),
        ]);
    }
    let head = match &r.target {
        Some(t) => format!("{} ranking for {t}\n", kind_name(r)),
        None => format!("{} ranking\n", kind_name(r)),
    };
    format!("{head}{}", t.render())
}

fn kind_name(r: &InfluenceReport) -> String {
    serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

pub(crate) fn run(ctx: &mut Ctx, a: &WhatifArgs) -> CliResult<()> {
    let loaded = load(&a.source)?;
    let g = &loaded.graph;
    let cfg = a.config.config();
    let mut manifest = ctx.manifest("whatif");
    manifest.inputs = loaded.inputs.clone();
    manifest.config = Some(cfg);
    let all = g.node_count();

    if a.global {
        let report = global_report(g, &cfg, a.top.unwrap_or(all))?;
        let table = ranking_table(g, &report);
        return ctx.emit(&a.out, manifest, table, json!({ "ranking": report }));
    }

    let target_label = a
        .target
        .as_deref()
        .or(loaded.default_target)
        .ok_or_else(|| CliError::Usage("--target is required".into()))?;
    let target = resolve(g, target_label, "--target")?;

    if let Some(kind) = a.rank {
        let report = rank_report(g, target, kind, &cfg, a.top.unwrap_or(all))?;
        let table = ranking_table(g, &report);
        return ctx.emit(&a.out, manifest, table, json!({ "ranking": report }));
    }
    if a.perturb.is_empty() && a.remove.is_empty() {
        return Err(CliError::Usage(
            "give --perturb, --remove, --rank or --global".into(),
        ));
    }

    let mut overlay = ScenarioOverlay::new();
    let mut edits = Vec::new();
    for spec in &a.perturb {
        let (node, harm) = parse_perturb(g, spec)?;
        if node == target {
            return Err(CliError::Usage(format!("--perturb: `{target_label}` is the target")));
        }
        overlay.set_override(node, harm)?;
        edits.push(Edit { node: g.label(node).into(), action: "perturb", harm: Some(harm) });
    }
    for label in &a.remove {
        let node = resolve(g, label, "--remove")?;
        if node == target {
            return Err(CliError::Usage(format!("--remove: `{target_label}` is the target")));
        }
        overlay.remove(node)?;
        edits.push(Edit { node: label.clone(), action: "remove", harm: None });
    }
    let kind = match (a.perturb.len(), a.remove.len()) {
        (1, 0) if edits[0].harm == Some(100.0) => "vulnerability",
        (0, 1) => "influence",
        _ => "scenario",
    };
    let baseline = scored_with(g, &ScenarioOverlay::new(), target, &cfg)?;
    let scenario = scored_with(g, &overlay, target, &cfg)?;
    let s = Scenario {
        kind,
        target: target_label.to_string(),
        edits,
        baseline,
        scenario,
        delta: scenario - baseline,
    };

    let mut t = Table::new(["node", "action", "harm"]);
    for e in &s.edits {
        t.row(vec![e.node.clone(), e.action.into(), e.harm.map_or("-".into(), num)]);
    }
    let table = format!(
        "{}\n{} of {}\nbaseline  {}\nscenario  {}\ndelta     {}\n",
        t.render(),
        s.kind,
        s.target,
        num(s.baseline),
        num(s.scenario),
        num(s.delta)
    );
    ctx.emit(&a.out, manifest, table, json!({ "whatif": s }))
}
