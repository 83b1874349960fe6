use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::evolution::{GenerationConfig, PaftConfig, TrainingConfig};
use crate::momdp::{EnvConfig, Environment};
use crate::policy::{PolicyConfig, PpoConfig};
use crate::{Error, Result};

const ENV_NAMES: [&str; 3] = ["mo_point", "mo_quadratic", "mo_quadratic3"];

/// A complete experiment description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label used to group runs in reports. Defaults to `pa2d`, or
    /// `pa2d-ablated` when fine-tuning is disabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub env: EnvConfig,
    pub evolution: GenerationConfig,
    #[serde(default)]
    pub ppo: PpoConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub paft: PaftConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub episodes: usize,
    /// Snapshot cadence in iterations.
    pub every: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            episodes: 8,
            every: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Record elapsed seconds in the metrics log. When false the column is
    /// written as 0 so repeated runs produce identical files.
    pub wall_clock: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { wall_clock: true }
    }
}

fn default_seeds() -> Vec<u64> {
    (0..6).collect()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_gamma() -> f64 {
    0.99
}

impl ExperimentConfig {
    /// Reads `path`, applies `key.path=value` overrides and validates.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, overrides).map_err(|e| match e {
            Error::Invalid(msg) => Error::Invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Invalid(format!("invalid config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        check_env_name(&table)?;
        let cfg: ExperimentConfig = if overrides.is_empty() {
            toml::from_str(text)
        } else {
            toml::Value::Table(table).try_into()
        }
        .map_err(|e| Error::Invalid(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn method(&self) -> String {
        match &self.method {
            Some(m) => m.clone(),
            None if self.paft.enabled => "pa2d".into(),
            None => "pa2d-ablated".into(),
        }
    }

    pub fn build_env(&self) -> Result<Box<dyn Environment>> {
        self.env.build(self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if self.method.as_deref().is_some_and(|m| m.trim().is_empty()) {
            return Err(Error::config("method", "must not be empty"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::config("output_dir", "must not be empty"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gamma", format!("must lie in (0, 1], got {}", self.gamma)));
        }
        if self.evolution.seed != 0 {
            return Err(Error::config("evolution.seed", "set seeds through the top-level `seeds` list"));
        }
        let env = self.build_env()?;
        self.training(0).validate(env.spec().num_objectives)
    }

    /// Training settings for one seed.
    pub fn training(&self, seed: u64) -> TrainingConfig {
        let mut generation = self.evolution.clone();
        generation.seed = seed;
        let mut t = TrainingConfig::new(generation);
        t.ppo = self.ppo.clone();
        t.policy = self.policy.clone();
        t.paft = self.paft.clone();
        t.eval_episodes = self.evaluation.episodes;
        t.eval_every = self.evaluation.every;
        t
    }

    /// The config of a single-seed run, as written next to its outputs.
    pub fn resolved_for(&self, seed: u64) -> ExperimentConfig {
        let mut c = self.clone();
        c.seeds = vec![seed];
        c.method = Some(self.method());
        c
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Invalid(format!("cannot serialize config: {e}")))
    }
}

fn check_env_name(table: &toml::Table) -> Result<()> {
    let name = table
        .get("env")
        .and_then(|e| e.as_table())
        .and_then(|e| e.get("name"));
    match name {
        None => Err(Error::config("env.name", "missing environment name")),
        Some(toml::Value::String(n)) if ENV_NAMES.contains(&n.as_str()) => Ok(()),
        Some(other) => Err(Error::config(
            "env.name",
            format!("unknown environment {other}; expected one of {}", ENV_NAMES.join(", ")),
        )),
    }
}

/// Sets `a.b.c = value` in `table`. The value is parsed as a TOML value and
/// falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "override must have the form key.path=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let path: Vec<&str> = key.split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty path segment in override"));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for (i, seg) in parents.iter().enumerate() {
        let slot = cur
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = slot.as_table_mut().ok_or_else(|| {
            Error::config(path[..=i].join("."), "is not a table and cannot take sub-keys")
        })?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
