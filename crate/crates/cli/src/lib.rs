// SPDX-License-Identifier: Apache-2.0

//! The `harmnet` command line. Everything runs through [`run`], which takes
//! the argument list and a writer for standard output so that tests can drive
//! it in-process.

pub mod args;
mod commands;
pub mod manifest;
pub mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;
use harmnet_core::centrality::CentralityError;
use harmnet_core::fixtures::{fixture, NAMES};
use harmnet_core::ingest::{load_graph, GraphDocument, IngestError};
use harmnet_core::whatif::WhatIfError;
use harmnet_core::{GraphError, HarmGraph, MetricsError};
use serde_json::Value;

use args::{Cli, Command, Format, GraphSource, OutputArgs};
use manifest::RunManifest;

pub use commands::check::{run_checks, CheckOutcome};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags or flag values. Exit code 2.
    Usage(String),
    /// Unreadable or inconsistent input data. Exit code 3.
    Data(String),
    /// Anything else, including failed verifications. Exit code 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::UnboundedWalks => CliError::Usage(format!("--mmax: {e}")),
            MetricsError::DivergentConfig { .. } | MetricsError::AlphaOutOfRange(_) => {
                CliError::Usage(format!("--alpha: {e}"))
            }
            MetricsError::InvalidTopK(_) => CliError::Usage(format!("--inner/--outer: {e}")),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<WhatIfError> for CliError {
    fn from(e: WhatIfError) -> Self {
        match e {
            WhatIfError::Metrics(m) => m.into(),
            WhatIfError::SelfQuery(_) | WhatIfError::Conflict(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<CentralityError> for CliError {
    fn from(e: CentralityError) -> Self {
        match e {
            CentralityError::Metrics(m) => m.into(),
            CentralityError::AlphaTooLarge { .. } => CliError::Usage(format!("--alpha: {e}")),
            CentralityError::Precondition(_) => CliError::Usage(format!("--mmax: {e}")),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) struct Ctx<'a> {
    /// Arguments after the program name, recorded in manifests.
    pub argv: Vec<String>,
    pub stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    pub fn manifest(&self, command: &str) -> RunManifest {
        RunManifest::new(command, &self.argv)
    }

    pub fn print(&mut self, text: &str) -> CliResult<()> {
        self.stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Failed(format!("cannot write output: {e}")))
    }

    /// Writes `table` or `json` (with the manifest attached) to the
    /// requested destination.
    pub fn emit(&mut self, out: &OutputArgs, manifest: RunManifest, table: String, json: Value) -> CliResult<()> {
        let path = out.output.as_ref().map(|p| p.display().to_string());
        let manifest = manifest.with_output(path);
        let text = match out.format {
            Format::Table => format!("{}{table}", manifest.comment()),
            Format::Json => json_with_manifest(&manifest, json),
        };
        match &out.output {
            Some(p) => write_file(p, &text),
            None => self.print(&text),
        }
    }
}

pub(crate) fn json_with_manifest(manifest: &RunManifest, body: Value) -> String {
    let mut obj = match body {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    obj.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serializes"));
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json serializes");
    s.push('\n');
    s
}

pub(crate) fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Failed(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

pub(crate) fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub(crate) struct Loaded {
    pub graph: HarmGraph,
    pub inputs: Vec<String>,
    /// The fixture's designated target, when loading a fixture.
    pub default_target: Option<&'static str>,
}

pub(crate) fn unknown_fixture(name: &str) -> CliError {
    let best = args::suggest(name, &NAMES);
    CliError::Usage(format!(
        "unknown fixture `{name}`{best}; available: {}",
        NAMES.join(", ")
    ))
}

pub(crate) fn load(src: &GraphSource) -> CliResult<Loaded> {
    if let Some(name) = &src.fixture {
        let f = fixture(name).map_err(|_| unknown_fixture(name))?;
        return Ok(Loaded {
            graph: f.graph,
            inputs: vec![format!("fixture:{}", f.name)],
            default_target: Some(f.target),
        });
    }
    if let Some(path) = &src.graph {
        let text = read_file(path)?;
        let graph = parse_graph_json(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        return Ok(Loaded {
            graph,
            inputs: vec![path.display().to_string()],
            default_target: None,
        });
    }
    match (&src.nodes, &src.edges) {
        (Some(n), Some(e)) => Ok(Loaded {
            graph: load_graph(n, e)?,
            inputs: vec![n.display().to_string(), e.display().to_string()],
            default_target: None,
        }),
        _ => Err(CliError::Usage("give --nodes and --edges, --graph, or --fixture".into())),
    }
}

/// A bare graph document, or any harmnet JSON output carrying one under
/// `graph`.
fn parse_graph_json(text: &str) -> Result<HarmGraph, IngestError> {
    GraphDocument::parse(text).or_else(|e| {
        let inner = serde_json::from_str::<Value>(text).ok().and_then(|mut v| v.get_mut("graph").map(Value::take));
        match inner {
            Some(v) => serde_json::from_value::<GraphDocument>(v)
                .map_err(|e| IngestError::Json(e.to_string()))?
                .to_graph(),
            None => Err(e),
        }
    })
}

pub(crate) fn resolve(g: &HarmGraph, label: &str, flag: &str) -> CliResult<harmnet_core::NodeId> {
    g.node(label)
        .ok_or_else(|| CliError::Data(format!("{flag}: unknown node `{label}`")))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return stdout
                .write_all(e.render().to_string().as_bytes())
                .map_err(|e| CliError::Failed(e.to_string()));
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    let argv = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let mut ctx = Ctx { argv, stdout };
    match cli.command {
        Command::Score(a) => commands::score::run(&mut ctx, &a),
        Command::Whatif(a) => commands::whatif::run(&mut ctx, &a),
        Command::Fixtures(a) => commands::fixtures::run(&mut ctx, &a),
        Command::Trade(a) => commands::trade::run(&mut ctx, &a),
        Command::Serve(a) => commands::serve::run(&mut ctx, &a),
        Command::Check(a) => commands::check::run(&mut ctx, &a),
        Command::Replay(a) => replay(&mut ctx, &a.file),
    }
}

fn replay(ctx: &mut Ctx, file: &Path) -> CliResult<()> {
    let text = read_file(file)?;
    let m = RunManifest::extract(&text)
        .ok_or_else(|| CliError::Data(format!("{}: no harmnet manifest found", file.display())))?;
    if m.command == "replay" || m.argv.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Data("refusing to replay a replay".into()));
    }
    let args = std::iter::once("harmnet".to_string()).chain(m.argv);
    run(args, ctx.stdout)
}
