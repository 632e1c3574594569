//! Harness configuration: one TOML file with a section per module,
//! overridable key by key and by `FILTER_LAB_OUT`.
//!
//! ```toml
//! [env]
//! kind = "forked_tree"
//!
//! [run]
//! algorithm = "nrmm_br"
//! rounds = 20
//!
//! [sweep]
//! seeds = [0, 1, 2]
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::{SweepSpec, StopSpec};
use crate::envs::EnvSpec;
use crate::error::{configuration, Result};
use crate::irl::{Algorithm, RunConfig};

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_ENV_VAR: &str = "FILTER_LAB_OUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub seeds: Vec<u64>,
    /// Extra environments for `sweep`; empty means `[env]` alone.
    pub envs: Vec<EnvSpec>,
    /// Algorithms for `sweep`; empty means `run.algorithm` alone.
    pub algorithms: Vec<Algorithm>,
    /// Gap threshold for interactions-to-threshold.
    pub threshold: f64,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            seeds: vec![0],
            envs: Vec::new(),
            algorithms: Vec::new(),
            threshold: 0.5,
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("filter-lab-out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    #[serde(default = "default_env")]
    pub env: EnvSpec,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_env() -> EnvSpec {
    EnvSpec::ForkedTree
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            env: default_env(),
            run: RunConfig::default(),
            sweep: SweepSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Applies `section.key=value` (dotted paths of any depth).
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| configuration(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(configuration(format!("override `{assignment}` has an empty key")));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| configuration(format!("override `{path}`: `{k}` is not a section")))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl HarnessConfig {
    /// Parses TOML text and applies overrides in order.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| configuration(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| configuration(format!("config: {e}")))?;
        cfg.run.validate()?;
        Ok(cfg)
    }

    /// Loads `path` (or defaults when `None`), applies overrides and the
    /// output environment variable.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| configuration(format!("config {}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut cfg = Self::from_toml_with(&text, overrides)?;
        if let Ok(dir) = std::env::var(OUTPUT_ENV_VAR) {
            if !dir.is_empty() {
                cfg.output.dir = PathBuf::from(dir);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| configuration(format!("config: {e}")))
    }

    /// The sweep described by this config.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let envs = if self.sweep.envs.is_empty() {
            vec![self.env.clone()]
        } else {
            self.sweep.envs.clone()
        };
        let algorithms = if self.sweep.algorithms.is_empty() {
            vec![self.run.clone()]
        } else {
            self.sweep
                .algorithms
                .iter()
                .map(|&a| RunConfig {
                    algorithm: a,
                    ..self.run.clone()
                })
                .collect()
        };
        let spec = SweepSpec {
            envs,
            algorithms,
            seeds: self.sweep.seeds.clone(),
            stop: StopSpec {
                rounds: self.run.rounds,
                eps_threshold: self.run.eps_threshold,
                gap_threshold: self.run.gap_threshold,
            },
            threshold: self.sweep.threshold,
            output_dir: self.output.dir.clone(),
            workers: self.sweep.workers,
        };
        spec.validate()?;
        Ok(spec)
    }
}
