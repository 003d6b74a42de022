//! Run configuration files, dotted-key overrides and metadata sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::engine::ScenarioConfig;
use crate::error::{Error, Result};
use crate::synthpop::PopulationSpec;

/// Everything needed to reproduce a command: population, scenario template,
/// seed and replicate count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub population: PopulationSpec,
    pub scenario: ScenarioConfig,
    pub seed: u64,
    pub replicates: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            population: PopulationSpec::default_city(),
            scenario: ScenarioConfig::baseline(),
            seed: 1,
            replicates: 20,
        }
    }
}

const TOP_LEVEL: [&str; 4] = ["population", "scenario", "seed", "replicates"];

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.population.validate()?;
        self.scenario.validate()?;
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        Ok(())
    }

    /// Load a config file, or the config embedded in a metadata sidecar.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: Value = serde_json::from_str(&text)?;
        let value = match value.get("config_hash") {
            Some(_) => value
                .get("config")
                .cloned()
                .ok_or_else(|| Error::config("config", "metadata file has no `config` entry"))?,
            None => value,
        };
        Ok(serde_json::from_value(value)?)
    }

    /// Apply `key=value` overrides. Keys are dotted paths into the config;
    /// paths not starting with a top-level section are looked up under
    /// `scenario`, so `disease.beta_c=0.028` works. Unknown keys are errors.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut value = serde_json::to_value(self)?;
        for o in overrides {
            let o = o.as_ref();
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| Error::config("override", format!("`{o}` is not key=value")))?;
            let key = key.trim();
            let first = key.split('.').next().unwrap_or_default();
            let path = if TOP_LEVEL.contains(&first) {
                key.to_string()
            } else {
                format!("scenario.{key}")
            };
            let slot = lookup_mut(&mut value, &path).ok_or_else(|| Error::UnknownOverride(key.to_string()))?;
            *slot = parse_value(raw.trim());
        }
        let cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| Error::config("override", e.to_string()))?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

fn lookup_mut<'a>(value: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    let mut cur = value;
    for part in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get_mut(part)?,
            Value::Array(items) => items.get_mut(part.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(cur)
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sidecar written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub config_hash: String,
    pub version: String,
}

impl Metadata {
    pub fn new(command: &str, config: &RunConfig, seeds: Vec<u64>) -> Self {
        Metadata {
            command: command.to_string(),
            config: config.clone(),
            seeds,
            config_hash: config.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Sidecar location for an output file: `out/x.csv` -> `out/x.meta.json`.
    pub fn sidecar_path(output: &Path) -> PathBuf {
        output.with_extension("meta.json")
    }

    /// Write the sidecar that belongs to `output`.
    pub fn write_for(&self, output: &Path) -> Result<()> {
        self.write(&Self::sidecar_path(output))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mitigation::Capacity;

    #[test]
    fn overrides_apply_and_reject_unknown() {
        let cfg = RunConfig::default();
        let c = cfg
            .with_overrides(&[
                "disease.beta_c=0.028",
                "mitigation.capacity=inf",
                "scenario.mitigation.cta_adoption=0.4",
                "seed=7",
                "contacts.random_fraction=0.014",
            ])
            .unwrap();
        assert_eq!(c.scenario.disease.beta_c, 0.028);
        assert_eq!(c.scenario.mitigation.capacity, Capacity::Unlimited);
        assert_eq!(c.scenario.mitigation.cta_adoption, 0.4);
        assert_eq!(c.seed, 7);
        assert_eq!(c.scenario.contacts.random_fraction, 0.014);

        match cfg.with_overrides(&["disease.beta_q=0.1"]) {
            Err(Error::UnknownOverride(k)) => assert_eq!(k, "disease.beta_q"),
            other => panic!("{other:?}"),
        }
        assert!(cfg.with_overrides(&["disease.beta_c"]).is_err());
        assert!(cfg.with_overrides(&["disease.beta_c=high"]).is_err());
    }

    #[test]
    fn optional_fields_are_overridable() {
        let c = RunConfig::default().with_overrides(&["disease.beta_r=0.0112"]).unwrap();
        assert_eq!(c.scenario.disease.beta_r, Some(0.0112));
    }

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::default().with_overrides(&["seed=42"]).unwrap();
        let meta = Metadata::new("run", &cfg, vec![1, 2]);
        let path = dir.path().join("m.json");
        meta.write(&path).unwrap();
        let back = RunConfig::load(&path).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), meta.config_hash);
    }
}
