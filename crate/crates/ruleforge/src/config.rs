//! Runtime configuration: a JSON file merged over defaults, then `RULEFORGE_*`
//! environment overrides. Command-line flags are applied last by the CLI.

use std::collections::BTreeMap;
use std::path::Path;

use ruleforge_core::scoring::CostTable;
use ruleforge_core::search::SearchConfig;
use ruleforge_core::selfsup::GenConfig;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formats::read_to_string;

pub const ENV_PREFIX: &str = "RULEFORGE_";

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub costs: CostTable,
    /// Weight of the augmentation reward.
    pub lambda: f64,
    pub search: SearchConfig,
    pub generator: GenConfig,
    pub negative_supports: bool,
    /// Simultaneous synthesis jobs in the service.
    pub max_jobs: usize,
    pub remote_endpoint: Option<String>,
    pub remote_timeout_ms: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            costs: CostTable::default(),
            lambda: ruleforge_core::scoring::DEFAULT_LAMBDA,
            search: SearchConfig::default(),
            generator: GenConfig::default(),
            negative_supports: false,
            max_jobs: 4,
            remote_endpoint: None,
            remote_timeout_ms: 10_000,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct FileSearch {
    max_states: Option<usize>,
    pruning: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct FileGenerator {
    max_len: Option<usize>,
    alt_p: Option<f64>,
    quant_p: Option<f64>,
    spec_k: Option<usize>,
    retries: Option<usize>,
    max_negatives: Option<usize>,
    skip_pruned_negatives: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct FileRemote {
    endpoint: Option<String>,
    timeout_ms: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct FileConfig {
    #[serde(default)]
    costs: BTreeMap<String, f64>,
    lambda: Option<f64>,
    #[serde(default)]
    search: FileSearch,
    #[serde(default)]
    generator: FileGenerator,
    negative_supports: Option<bool>,
    max_jobs: Option<usize>,
    #[serde(default)]
    remote: FileRemote,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Config {
    /// Defaults, then the optional file, then the process environment.
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let mut config = Config::default();
        if let Some(path) = path {
            config.merge_json(&read_to_string(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
        config.apply_env(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    pub fn merge_json(&mut self, text: &str) -> Result<()> {
        let file: FileConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (key, value) in &file.costs {
            self.costs.set(key, *value)?;
        }
        set(&mut self.lambda, file.lambda);
        set(&mut self.search.max_states, file.search.max_states);
        set(&mut self.search.pruning, file.search.pruning);
        let g = file.generator;
        set(&mut self.generator.max_len, g.max_len);
        set(&mut self.generator.alt_p, g.alt_p);
        set(&mut self.generator.quant_p, g.quant_p);
        set(&mut self.generator.spec_k, g.spec_k);
        set(&mut self.generator.retries, g.retries);
        set(&mut self.generator.max_negatives, g.max_negatives);
        set(&mut self.generator.skip_pruned_negatives, g.skip_pruned_negatives);
        set(&mut self.negative_supports, file.negative_supports);
        set(&mut self.max_jobs, file.max_jobs);
        if file.remote.endpoint.is_some() {
            self.remote_endpoint = file.remote.endpoint;
        }
        set(&mut self.remote_timeout_ms, file.remote.timeout_ms);
        self.search.costs = self.costs.clone();
        Ok(())
    }

    /// Applies `RULEFORGE_*` variables. `RULEFORGE_COST_<KEY>` overrides one
    /// cost (`RULEFORGE_COST_NOT`, `RULEFORGE_COST_STAR`, ...).
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
        for (name, value) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
            let bad = |what: &str| Error::Config(format!("{name}={value}: expected {what}"));
            let num = || value.parse::<f64>().map_err(|_| bad("a number"));
            let count = || value.parse::<usize>().map_err(|_| bad("a count"));
            let flag = || value.parse::<bool>().map_err(|_| bad("true or false"));
            match key {
                "LAMBDA" => self.lambda = num()?,
                "MAX_STATES" => self.search.max_states = count()?,
                "PRUNING" => self.search.pruning = flag()?,
                "MAX_LEN" => self.generator.max_len = count()?,
                "ALT_P" => self.generator.alt_p = num()?,
                "QUANT_P" => self.generator.quant_p = num()?,
                "SPEC_K" => self.generator.spec_k = count()?,
                "RETRIES" => self.generator.retries = count()?,
                "MAX_NEGATIVES" => self.generator.max_negatives = count()?,
                "NEGATIVE_SUPPORTS" => self.negative_supports = flag()?,
                "MAX_JOBS" => self.max_jobs = count()?,
                "REMOTE_ENDPOINT" => self.remote_endpoint = Some(value.clone()),
                "REMOTE_TIMEOUT_MS" => self.remote_timeout_ms = value.parse().map_err(|_| bad("milliseconds"))?,
                "CONFIG" | "LOG" => {}
                other => match other.strip_prefix("COST_") {
                    Some(cost) => self.costs.set(&cost.to_ascii_lowercase(), num()?)?,
                    None => log::warn!("ignoring unknown variable {name}"),
                },
            }
        }
        self.search.costs = self.costs.clone();
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.costs.validate()?;
        self.generator.validate()?;
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config(format!("lambda must be a non-negative number, got {}", self.lambda)));
        }
        if self.search.max_states == 0 {
            return Err(Error::Config("max states must be at least 1".into()));
        }
        if self.max_jobs == 0 {
            return Err(Error::Config("max jobs must be at least 1".into()));
        }
        Ok(())
    }
}
