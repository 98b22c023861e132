//! Output directory bookkeeping: resolved config, manifest and run log.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects everything a command writes under `--out-dir`.
pub struct Outputs {
    dir: PathBuf,
    command: &'static str,
    seed: u64,
    preset: Option<String>,
    config_toml: String,
    config_hash: String,
    inputs: Vec<Value>,
    files: Vec<Value>,
    runs: Vec<Value>,
    summary: serde_json::Map<String, Value>,
}

impl Outputs {
    pub fn create(
        dir: &Path,
        command: &'static str,
        seed: u64,
        preset: Option<String>,
        cfg: &RunConfig,
    ) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("{}: cannot create output directory", dir.display()))?;
        let config_toml = cfg.to_toml();
        let config_hash = sha256_hex(config_toml.as_bytes());
        let mut out = Self {
            dir: dir.to_path_buf(),
            command,
            seed,
            preset,
            config_toml,
            config_hash,
            inputs: Vec::new(),
            files: Vec::new(),
            runs: Vec::new(),
            summary: serde_json::Map::new(),
        };
        let text = out.config_toml.clone();
        out.write("config.toml", text.as_bytes())?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write a file relative to the output directory and record its digest.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("{}: cannot write", path.display()))?;
        self.record(name, bytes);
        Ok(path)
    }

    /// Record a file some other routine already wrote.
    pub fn written(&mut self, name: &str) -> Result<()> {
        let bytes = std::fs::read(self.path(name)).with_context(|| format!("{name}: cannot read back"))?;
        self.record(name, &bytes);
        Ok(())
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.files
            .push(json!({ "path": name, "bytes": bytes.len(), "sha256": sha256_hex(bytes) }));
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("{}: cannot read", path.display()))?;
        self.inputs
            .push(json!({ "path": path.display().to_string(), "sha256": sha256_hex(&bytes) }));
        Ok(())
    }

    /// One run-log line per simulation cell with its derived stream seed.
    pub fn cell(&mut self, experiment: &str, coords: &[u64], stream_seed: u64) {
        self.runs.push(json!({
            "command": self.command,
            "experiment": experiment,
            "cell": coords,
            "master_seed": self.seed,
            "stream_seed": stream_seed,
            "config_hash": self.config_hash,
            "version": env!("CARGO_PKG_VERSION"),
        }));
    }

    pub fn summarize(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    /// Write `runs.jsonl` and `manifest.json`.
    pub fn finish(mut self) -> Result<()> {
        let mut log = String::new();
        for r in &self.runs {
            log.push_str(&r.to_string());
            log.push('\n');
        }
        self.write("runs.jsonl", log.as_bytes())?;
        let manifest = json!({
            "tool": "spikedx",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.seed,
            "preset": self.preset,
            "config_hash": self.config_hash,
            "inputs": self.inputs,
            "outputs": self.files,
            "summary": Value::Object(self.summary),
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).with_context(|| format!("{}: cannot write", path.display()))?;
        Ok(())
    }
}
