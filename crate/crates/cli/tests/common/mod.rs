// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_harmnet");

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn harmnet_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().expect("binary runs")
}

pub fn harmnet(args: &[&str]) -> Output {
    harmnet_in(Path::new(env!("CARGO_MANIFEST_DIR")), args)
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

/// Runs the command in-process and returns its standard output.
pub fn run(args: &[&str]) -> Result<String, harmnet_cli::CliError> {
    let mut out = Vec::new();
    harmnet_cli::run(std::iter::once("harmnet").chain(args.iter().copied()), &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

pub fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&run(args).unwrap()).unwrap()
}

/// Copies the toy trade inputs into `dir`.
pub fn stage_trade_toy(dir: &Path) {
    for f in ["flows.csv", "indicators.csv", "specs.csv", "aliases.csv"] {
        std::fs::copy(data_dir().join("trade-toy").join(f), dir.join(f)).unwrap();
    }
}

pub const TRADE_TOY_ARGS: &[&str] = &[
    "trade",
    "--flows",
    "flows.csv",
    "--indicators",
    "indicators.csv",
    "--specs",
    "specs.csv",
    "--aliases",
    "aliases.csv",
    "--year",
    "2019",
    "--k",
    "2",
    "--out-dir",
    "expected",
];

pub const TRADE_TOY_OUTPUTS: &[&str] =
    &["nodes.csv", "edges.csv", "scores.csv", "influence.csv", "network.json"];
