// SPDX-License-Identifier: Apache-2.0

use harmnet_core::centrality::verify_reduction;
use harmnet_core::metrics::evaluate;
use harmnet_core::{Aggregator, HarmConfig, HarmGraph, NodeId, PathScheme, ScoreReport};
use serde_json::json;

use crate::args::ScoreArgs;
use crate::render::{num, opt, Table};
use crate::{load, resolve, CliError, CliResult, Ctx};

pub(crate) fn targets(
    g: &HarmGraph,
    labels: &[String],
    all: bool,
    default: Option<&str>,
) -> CliResult<Vec<NodeId>> {
    if all {
        return Ok(g.nodes().collect());
    }
    if labels.is_empty() {
        let d = default.ok_or_else(|| CliError::Usage("--target is required (or --all)".into()))?;
        return Ok(vec![resolve(g, d, "--target")?]);
    }
    labels.iter().map(|l| resolve(g, l, "--target")).collect()
}

pub fn score_reports(g: &HarmGraph, targets: &[NodeId], cfg: &HarmConfig) -> CliResult<Vec<ScoreReport>> {
    targets
        .iter()
        .map(|&t| Ok(ScoreReport::new(g, evaluate(g, t, cfg)?, cfg)))
        .collect()
}

pub fn score_table(reports: &[ScoreReport]) -> String {
    let mut summary = Table::new(["target", "H", "m_max"]);
    for r in reports {
        summary.row(vec![r.target.clone(), num(r.value), r.m_max.to_string()]);
    }
    let mut out = summary.render();
    for r in reports {
        out.push_str(&format!("\nlevels for {}\n", r.target));
        let mut t = Table::new(["m", "size", "distinct", "x_m", "weighted"]);
        for l in &r.levels {
            t.row(vec![
                l.m.to_string(),
                l.size.to_string(),
                l.distinct.to_string(),
                opt(l.x_m),
                opt(l.weighted),
            ]);
        }
        out.push_str(&t.render());
    }
    out
}

pub(crate) fn run(ctx: &mut Ctx, a: &ScoreArgs) -> CliResult<()> {
    let loaded = load(&a.source)?;
    let g = &loaded.graph;
    let cfg = a.config.config();
    let mut manifest = ctx.manifest("score");
    manifest.inputs = loaded.inputs.clone();
    manifest.config = Some(cfg);

    if a.verify_reduction {
        return verify(ctx, a, g, cfg, manifest);
    }
    let ts = targets(g, &a.target, a.all, loaded.default_target)?;
    let reports = score_reports(g, &ts, &cfg)?;
    let table = score_table(&reports);
    ctx.emit(&a.out, manifest, table, json!({ "scores": reports }))
}

fn verify(ctx: &mut Ctx, a: &ScoreArgs, g: &HarmGraph, cfg: HarmConfig, manifest: crate::manifest::RunManifest) -> CliResult<()> {
    if cfg.scheme != PathScheme::AllPaths || cfg.inner != Aggregator::Sum || cfg.outer != Aggregator::Sum {
        return Err(CliError::Usage(
            "--verify-reduction needs --scheme all --inner sum --outer sum".into(),
        ));
    }
    let m_max = cfg.resolve_m_max(g)?;
    let report = verify_reduction(g, cfg.alpha, m_max)?;
    let mut t = Table::new(["node", "H", "closed_form", "deviation"]);
    for r in &report.rows {
        t.row(vec![
            g.label(r.node).to_string(),
            num(r.network_harm),
            num(r.closed_form),
            format!("{:.3e}", (r.network_harm - r.closed_form).abs()),
        ]);
    }
    let verdict = format!(
        "{} reduction alpha={} lambda={} m_max={} max_deviation={:.3e}\n",
        if report.passed { "PASS" } else { "FAIL" },
        report.alpha,
        num(report.spectral_radius),
        report.m_max,
        report.max_deviation
    );
    let table = format!("{}{verdict}", t.render());
    ctx.emit(&a.out, manifest, table, json!({ "reduction": report }))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed(verdict.trim_end().to_string()))
    }
}
