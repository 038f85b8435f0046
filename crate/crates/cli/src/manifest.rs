use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use trng_core::bits::sha256_hex;
use trng_core::config::KeyValues;
use trng_core::Result;

/// Run record. Keys serialize sorted, so manifests diff cleanly.
#[derive(Debug)]
pub struct Manifest {
    command: String,
    config: KeyValues,
    inputs: Map<String, Value>,
    outputs: Map<String, Value>,
    summary: Map<String, Value>,
    wall_clock_s: f64,
}

fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

impl Manifest {
    pub fn new(command: &str, config: KeyValues) -> Self {
        Manifest {
            command: command.to_string(),
            config,
            inputs: Map::new(),
            outputs: Map::new(),
            summary: Map::new(),
            wall_clock_s: 0.0,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.insert(path.display().to_string(), Value::String(file_hash(path)?));
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs.insert(path.display().to_string(), Value::String(file_hash(path)?));
        Ok(())
    }

    pub fn summary(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn summary_map(&self) -> &Map<String, Value> {
        &self.summary
    }

    pub fn set_wall_clock(&mut self, secs: f64) {
        self.wall_clock_s = secs;
    }

    pub fn to_value(&self) -> Value {
        let config: Map<String, Value> = self.config.iter().map(|(k, v)| (k.to_string(), Value::String(v.to_string()))).collect();
        json!({
            "command": self.command,
            "config": config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "summary": self.summary,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "wall_clock_s": self.wall_clock_s,
        })
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(format!("{}.manifest.json", self.command));
        let text = serde_json::to_string_pretty(&self.to_value()).expect("manifest serializes");
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
