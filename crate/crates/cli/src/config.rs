use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

/// Environment variable naming a JSON file that overrides the scale guards.
pub const CONFIG_ENV: &str = "CONFCOH_CONFIG";

/// Scale guards. Requests above these exit with code 2 unless
/// `--allow-large` is given.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub max_n: usize,
    pub max_series_arity: usize,
    pub ce_bound: usize,
    pub ainfty_max_n: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_n: 7,
            max_series_arity: 12,
            ce_bound: confcoh::celie::DEFAULT_CE_BOUND,
            ainfty_max_n: 8,
        }
    }
}

impl Limits {
    pub fn load() -> anyhow::Result<Limits> {
        match std::env::var_os(CONFIG_ENV) {
            None => Ok(Limits::default()),
            Some(p) => {
                let p = Path::new(&p);
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}
