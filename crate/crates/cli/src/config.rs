//! Optional TOML run configuration. Any flag can also be set here; explicit
//! flags always win over config values, which win over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub distance: Option<String>,
    pub k_pivots: Option<usize>,
    pub seed_index: Option<usize>,
    pub tau: Option<f64>,
    pub knn: Option<usize>,
    pub batch_size: Option<usize>,
    pub workers: Option<usize>,
    pub rng_seed: Option<u64>,
    pub log: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config file {}", p.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("cannot parse config file {}", p.display()))
            }
        }
    }
}

/// Flag beats config beats default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// Flag beats config; absence of both is an error.
pub fn pick_required<T>(flag: Option<T>, config: Option<T>, name: &str) -> anyhow::Result<T> {
    flag.or(config)
        .with_context(|| format!("`--{name}` is required (flag or config file)"))
}
