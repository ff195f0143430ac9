// SPDX-License-Identifier: Apache-2.0

use harmnet_core::HarmConfig;
use serde::{Deserialize, Serialize};

const PREFIX: &str = "# manifest: ";

/// What produced an output file. Written into every output so the run can be
/// repeated with `harmnet replay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, verbatim.
    pub argv: Vec<String>,
    #[serde(default)]
    pub config: Option<HarmConfig>,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        RunManifest {
            tool: "harmnet".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: argv.to_vec(),
            config: None,
            inputs: Vec::new(),
            output: None,
            seed: None,
        }
    }

    /// Comment line for CSV and table outputs.
    pub fn comment(&self) -> String {
        format!("{PREFIX}{}\n", serde_json::to_string(self).expect("manifest serializes"))
    }

    pub fn with_output(&self, output: Option<String>) -> Self {
        RunManifest { output, ..self.clone() }
    }

    /// Recovers the manifest from a JSON or commented text output.
    pub fn extract(text: &str) -> Option<RunManifest> {
        if text.trim_start().starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(text).ok()?;
            return serde_json::from_value(v.get("manifest")?.clone()).ok();
        }
        text.lines()
            .find_map(|l| l.strip_prefix(PREFIX))
            .and_then(|json| serde_json::from_str(json).ok())
    }
}
