// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmnet_core::ingest::PruneMode;
use harmnet_core::whatif::RankingKind;
use harmnet_core::{Aggregator, Direction, HarmConfig, PathScheme};

#[derive(Debug, Parser)]
#[command(name = "harmnet", version, about = "Network harm scoring for supply and trade graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Network harm of one or more targets, with the per-level breakdown.
    Score(ScoreArgs),
    /// Vulnerability, influence and global influence reports.
    Whatif(WhatifArgs),
    /// Write a bundled or random graph as node/edge tables.
    Fixtures(FixturesArgs),
    /// Build, prune and score a trade network from flow and indicator tables.
    Trade(TradeArgs),
    /// Serve the HTTP API over a graph.
    Serve(ServeArgs),
    /// Seeded randomized self-check of the path and reduction oracles.
    Check(CheckArgs),
    /// Re-run the command recorded in an output file's manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Args)]
#[group(id = "source", required = true, multiple = true)]
pub struct GraphSource {
    /// Node table (`label,harm[,name]`).
    #[arg(long, requires = "edges")]
    pub nodes: Option<PathBuf>,
    /// Edge table (`src,dst`, src supplies dst).
    #[arg(long, requires = "nodes")]
    pub edges: Option<PathBuf>,
    /// JSON graph document.
    #[arg(long, conflicts_with_all = ["nodes", "edges", "fixture"])]
    pub graph: Option<PathBuf>,
    /// A bundled fixture, e.g. fig5a.
    #[arg(long, conflicts_with_all = ["nodes", "edges"])]
    pub fixture: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Aggregator within a level: max, avg, sum or top-<k>.
    #[arg(long, default_value = "avg", value_parser = aggregator)]
    pub inner: Aggregator,
    /// Aggregator across levels.
    #[arg(long, default_value = "max", value_parser = aggregator)]
    pub outer: Aggregator,
    /// Per-level attenuation, in (0, 1].
    #[arg(long, default_value_t = 0.85, value_parser = alpha)]
    pub alpha: f64,
    /// Longest path length; exhaustive when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub mmax: Option<u64>,
    /// all, simple, shortest-all or shortest-one.
    #[arg(long, default_value = "shortest-all", value_parser = scheme)]
    pub scheme: PathScheme,
    /// upstream (suppliers) or downstream (customers).
    #[arg(long, default_value = "upstream", value_parser = direction)]
    pub direction: Direction,
}

impl ConfigArgs {
    pub fn config(&self) -> HarmConfig {
        let cfg = HarmConfig::new(self.outer, self.inner, self.alpha)
            .with_scheme(self.scheme)
            .with_direction(self.direction);
        match self.mmax {
            Some(m) => cfg.with_m_max(m as usize),
            None => cfg,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Target label; repeatable. Defaults to the fixture's target.
    #[arg(long, short)]
    pub target: Vec<String>,
    /// Score every node.
    #[arg(long, conflicts_with = "target")]
    pub all: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Compare sum/sum walk scores against the resolvent closed form.
    #[arg(long)]
    pub verify_reduction: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WhatifArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, short)]
    pub target: Option<String>,
    /// Set a node's harm, `label` (to 100) or `label=harm`; repeatable.
    #[arg(long, value_name = "NODE[=HARM]")]
    pub perturb: Vec<String>,
    /// Remove a node; repeatable.
    #[arg(long, value_name = "NODE")]
    pub remove: Vec<String>,
    /// Global influence of every node, summed over all targets.
    #[arg(long, conflicts_with_all = ["perturb", "remove", "rank", "target"])]
    pub global: bool,
    /// Rank every node by vulnerability or influence on the target.
    #[arg(long, value_parser = ranking, conflicts_with_all = ["perturb", "remove"])]
    pub rank: Option<RankingKind>,
    /// Keep the first N ranked rows.
    #[arg(long)]
    pub top: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FixturesArgs {
    /// Fixture name, `random`, or `all`.
    #[arg(required_unless_present = "list")]
    pub name: Option<String>,
    /// Print the available fixtures.
    #[arg(long)]
    pub list: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Seed for `random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Node count for `random`.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Edge probability for `random`.
    #[arg(long, default_value_t = 0.3, value_parser = probability)]
    pub p: f64,
    /// Only edges from higher to lower ids for `random`.
    #[arg(long)]
    pub acyclic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TradeArgs {
    /// Flow table (`origin,dest,sector,year,value_usd`).
    #[arg(long)]
    pub flows: PathBuf,
    /// Indicator values (`entity,indicator,value`).
    #[arg(long)]
    pub indicators: PathBuf,
    /// Indicator directions (`indicator,higher_is_better`).
    #[arg(long)]
    pub specs: PathBuf,
    /// Label aliases (`alias,canonical`); canonical `-` drops the entity.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    #[arg(long)]
    pub year: i32,
    /// Keep an edge only when its summed value is strictly above this (USD).
    #[arg(long, default_value_t = harmnet_core::ingest::DEFAULT_THRESHOLD_USD)]
    pub threshold: f64,
    /// once or fixpoint.
    #[arg(long, default_value = "fixpoint", value_parser = prune_mode)]
    pub prune_mode: PruneMode,
    /// Intrinsic harm is the mean of the k worst indicators.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Keep countries with at least this many indicators reported.
    #[arg(long)]
    pub allow_partial: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Idle session lifetime in seconds.
    #[arg(long, default_value_t = 3600)]
    pub session_ttl: u64,
    /// Seconds a ranking request waits before answering 202.
    #[arg(long, default_value_t = 60)]
    pub ranking_timeout: u64,
    /// Concurrent ranking jobs; defaults to the CPU count.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Additional allowed CORS origin; repeatable.
    #[arg(long)]
    pub cors_origin: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub cases: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// An output file written by harmnet.
    pub file: PathBuf,
}

/// Closest candidate within two edits, transpositions counting once.
pub(crate) fn suggest(input: &str, candidates: &[&str]) -> String {
    let input = input.to_ascii_lowercase();
    candidates
        .iter()
        .map(|c| (strsim::osa_distance(&input, c), *c))
        .min()
        .filter(|(d, _)| *d <= 2)
        .map(|(_, c)| format!(" (did you mean `{c}`?)"))
        .unwrap_or_default()
}

fn choice<T: FromStr<Err = String>>(s: &str, candidates: &[&str]) -> Result<T, String> {
    s.parse().map_err(|e| format!("{e}{}", suggest(s, candidates)))
}

fn aggregator(s: &str) -> Result<Aggregator, String> {
    choice(s, &["max", "avg", "sum", "top-50"])
}

fn scheme(s: &str) -> Result<PathScheme, String> {
    choice(s, &["all", "simple", "shortest-all", "shortest-one"])
}

fn direction(s: &str) -> Result<Direction, String> {
    choice(s, &["upstream", "downstream"])
}

fn ranking(s: &str) -> Result<RankingKind, String> {
    match choice::<RankingKind>(s, &["vulnerability", "influence"])? {
        RankingKind::Global => Err("use --global for global influence".into()),
        k => Ok(k),
    }
}

fn prune_mode(s: &str) -> Result<PruneMode, String> {
    choice(s, &["once", "fixpoint"])
}

fn alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if a.is_finite() && a > 0.0 && a <= 1.0 {
        Ok(a)
    } else {
        Err(format!("{a} is outside (0, 1]"))
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is outside [0, 1]"))
    }
}
