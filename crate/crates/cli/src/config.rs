//! Flat key/value config files whose keys mirror the long flag names.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub model: Option<String>,
    pub lambda: Option<f64>,
    pub class: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub force: Option<bool>,
    pub n: Option<usize>,
    pub estimator: Option<String>,
    pub delta: Option<f64>,
    pub restarts: Option<usize>,
    pub estimators: Option<Vec<String>>,
    pub n_grid: Option<Vec<usize>>,
    pub replications: Option<usize>,
    pub experiment_id: Option<String>,
    pub draws: Option<usize>,
    pub step: Option<f64>,
    pub c_max: Option<f64>,
    pub constrained: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

/// Flag value if given, else the file value, else the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
