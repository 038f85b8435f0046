//! Resolved run configuration: defaults, then the config file, then flags.

use std::fs;
use std::path::Path;

use serde_json::Value;
use trng_core::analysis::AnalysisConfig;
use trng_core::chain::ChainConfig;
use trng_core::config::{Configurable, KeyValues};
use trng_core::crypto::PerturbConfig;
use trng_core::nist::TestParams;
use trng_core::nlfsr::ExpandConfig;
use trng_core::sim::SimParams;
use trng_core::{Error, Result};

pub const SECTIONS: [&str; 6] = ["sim", "chain", "tl", "nist", "nlfsr", "dp"];

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub sim: SimParams,
    pub chain: ChainConfig,
    pub tl: AnalysisConfig,
    pub nist: TestParams,
    pub nlfsr: ExpandConfig,
    pub dp: PerturbConfig,
}

/// Reads `key=value` text, or the `config` object of a JSON manifest.
pub fn load_file(path: &Path) -> Result<KeyValues> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let obj = doc
            .get("config")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Format(format!("{}: manifest has no config object", path.display())))?;
        let mut kv = KeyValues::new();
        for (k, v) in obj {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            kv.set(k.clone(), v);
        }
        return Ok(kv);
    }
    KeyValues::parse(&text)
}

impl RunConfig {
    pub fn resolve(kv: &KeyValues) -> Result<Self> {
        for (k, _) in kv.iter() {
            let known = k.split_once('.').is_some_and(|(p, rest)| SECTIONS.contains(&p) && !rest.is_empty());
            if !known {
                return Err(Error::UnknownKey(k.to_string()));
            }
        }
        let mut cfg = RunConfig::default();
        let with_prefix = |prefix: &str, e: Error| match e {
            Error::UnknownKey(k) => Error::UnknownKey(format!("{prefix}.{k}")),
            other => other,
        };
        cfg.sim.apply(&kv.section("sim")).map_err(|e| with_prefix("sim", e))?;
        cfg.chain.apply(&kv.section("chain")).map_err(|e| with_prefix("chain", e))?;
        cfg.tl.apply(&kv.section("tl")).map_err(|e| with_prefix("tl", e))?;
        cfg.nist.apply(&kv.section("nist")).map_err(|e| with_prefix("nist", e))?;
        cfg.nlfsr.apply(&kv.section("nlfsr")).map_err(|e| with_prefix("nlfsr", e))?;
        cfg.dp.apply(&kv.section("dp")).map_err(|e| with_prefix("dp", e))?;
        cfg.sim.validate()?;
        cfg.chain.validate()?;
        cfg.nist.validate()?;
        cfg.nlfsr.validate()?;
        cfg.dp.validate()?;
        Ok(cfg)
    }

    /// Every parameter, prefixed, as the manifest records it.
    pub fn resolved(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        let mut add = |prefix: &str, pairs: Vec<(&'static str, String)>| {
            for (k, v) in pairs {
                kv.set(format!("{prefix}.{k}"), v);
            }
        };
        add("sim", self.sim.key_values());
        add("chain", self.chain.key_values());
        add("tl", self.tl.key_values());
        add("nist", self.nist.key_values());
        add("nlfsr", self.nlfsr.key_values());
        add("dp", self.dp.key_values());
        kv
    }
}
