// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use harmnet_core::fixtures::{fixture, random_graph, NAMES};
use harmnet_core::ingest::{write_edges_csv, write_nodes_csv, GraphDocument};
use harmnet_core::HarmGraph;
use serde_json::json;

use crate::args::{FixturesArgs, Format};
use crate::manifest::RunManifest;
use crate::render::Table;
use crate::{json_with_manifest, unknown_fixture, write_file, CliResult, Ctx};

struct Named {
    name: String,
    target: String,
    description: String,
    graph: HarmGraph,
}

fn provenance(f: &Named) -> String {
    format!(
        "# fixture: {}\n# target: {}\n# source: {}\n",
        f.name, f.target, f.description
    )
}

fn write(ctx: &mut Ctx, a: &FixturesArgs, f: &Named, base: &RunManifest) -> CliResult<()> {
    let mut paths: Vec<PathBuf> = Vec::new();
    match a.format {
        Format::Table => {
            for (suffix, body) in [("nodes", write_nodes_csv(&f.graph)), ("edges", write_edges_csv(&f.graph))] {
                let path = a.out_dir.join(format!("{}.{suffix}.csv", f.name));
                let m = base.with_output(Some(path.display().to_string()));
                write_file(&path, &format!("{}{}{body}", m.comment(), provenance(f)))?;
                paths.push(path);
            }
        }
        Format::Json => {
            let path = a.out_dir.join(format!("{}.json", f.name));
            let m = base.with_output(Some(path.display().to_string()));
            let body = json!({
                "fixture": { "name": f.name, "target": f.target, "description": f.description },
                "graph": GraphDocument::from_graph(&f.graph),
            });
            write_file(&path, &json_with_manifest(&m, body))?;
            paths.push(path);
        }
    }
    for p in paths {
        ctx.print(&format!("wrote {}\n", p.display()))?;
    }
    Ok(())
}

fn bundled(name: &str) -> CliResult<Named> {
    let f = fixture(name).map_err(|_| unknown_fixture(name))?;
    Ok(Named {
        name: f.name.into(),
        target: f.target.into(),
        description: f.description.into(),
        graph: f.graph,
    })
}

pub(crate) fn run(ctx: &mut Ctx, a: &FixturesArgs) -> CliResult<()> {
    if a.list {
        let mut t = Table::new(["name", "target", "nodes", "edges", "description"]);
        for name in NAMES {
            let f = bundled(name)?;
            t.row(vec![
                f.name,
                f.target,
                f.graph.node_count().to_string(),
                f.graph.edge_count().to_string(),
                f.description,
            ]);
        }
        return ctx.print(&t.render());
    }
    let name = a.name.as_deref().unwrap_or_default();
    let mut base = ctx.manifest("fixtures");
    let fixtures = match name {
        "all" => NAMES.iter().map(|n| bundled(n)).collect::<CliResult<Vec<_>>>()?,
        "random" => {
            base.seed = Some(a.seed);
            vec![Named {
                name: format!("random-{}", a.seed),
                target: "v0".into(),
                description: format!(
                    "seeded random digraph: seed {}, n {}, p {}, acyclic {}",
                    a.seed, a.n, a.p, a.acyclic
                ),
                graph: random_graph(a.seed, a.n.max(1), a.p, a.acyclic),
            }]
        }
        other => vec![bundled(other)?],
    };
    for f in &fixtures {
        write(ctx, a, f, &base)?;
    }
    Ok(())
}
