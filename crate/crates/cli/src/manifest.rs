//! Experiment manifests: enough to re-run an invocation bit-exactly in
//! single-threaded mode (command echo, config, seed, input digests).

use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct ExperimentManifest<C: Serialize> {
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    pub master_seed: u64,
    pub jobs_note: &'static str,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub inputs: Vec<InputDigest>,
    pub config: C,
}

pub struct ManifestBuilder {
    command: String,
    started: u64,
    inputs: Vec<InputDigest>,
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        ManifestBuilder { command: command.to_string(), started: now_unix(), inputs: Vec::new() }
    }

    pub fn add_input(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes =
            std::fs::read(path).with_context(|| format!("reading input {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: format!("{digest:x}"),
        });
        Ok(())
    }

    pub fn write<C: Serialize>(self, dir: &Path, seed: u64, config: C) -> anyhow::Result<()> {
        let manifest = ExperimentManifest {
            command: self.command,
            argv: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: seed,
            jobs_note: "outputs are independent of --jobs; timestamps live only in this manifest",
            started_unix: self.started,
            finished_unix: now_unix(),
            inputs: self.inputs,
            config,
        };
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
