use std::path::{Path, PathBuf};

use dstmd::stimulus::StimulusSpec;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Everything needed to repeat a run. Deliberately free of timestamps so
/// that repeated runs produce identical files.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stimulus: Option<StimulusSpec>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &'static str) -> RunManifest {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            model: None,
            config: None,
            input: None,
            stimulus: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(mut self, dir: &Path) -> Result<()> {
        self.outputs.push(MANIFEST_NAME.into());
        crate::io::write_json(&dir.join(MANIFEST_NAME), &self)
    }
}
