use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, RateRecord, RatesSummary};
use crate::error::{Error, Result};
use crate::limit::ZDistribution;

pub const CSV_HEADER: [&str; 9] = [
    "experiment_id",
    "n",
    "rep",
    "estimator",
    "mu_symdiff",
    "p_symdiff",
    "hausdorff",
    "m_magnified",
    "pair_mu",
];
pub const CSV_SCHEMA_VERSION: u32 = 1;

const RECORDS: &str = "records.csv";
const MANIFEST: &str = "manifest.json";
const SUMMARY: &str = "summary.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub csv_schema_version: u32,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// SHA-256 of `records.csv`.
    pub content_hash: String,
}

/// Hex SHA-256 digest.
pub fn content_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Records in the fixed CSV schema; floats use shortest round-trip form.
pub fn records_csv(records: &[RateRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.experiment_id.clone(),
            r.n.to_string(),
            r.rep.to_string(),
            r.estimator.clone(),
            r.mu_symdiff.to_string(),
            r.p_symdiff.to_string(),
            r.hausdorff.to_string(),
            r.m_magnified.to_string(),
            r.pair_mu.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Fails with `OutputExists` if the directory already holds results.
pub(crate) fn check_writable(dir: &Path, force: bool) -> Result<()> {
    let target = dir.join(RECORDS);
    if target.exists() && !force {
        return Err(Error::OutputExists(target.display().to_string()));
    }
    Ok(())
}

fn pretty_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `records.csv`, `manifest.json` and `summary.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    records: &[RateRecord],
    summary: &RatesSummary,
    force: bool,
) -> Result<Manifest> {
    check_writable(dir, force)?;
    fs::create_dir_all(dir)?;
    let csv_bytes = records_csv(records)?;
    let manifest = Manifest {
        tool: "levelset".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        csv_schema_version: CSV_SCHEMA_VERSION,
        seed: cfg.seed,
        config: ExperimentConfig {
            output_dir: None,
            ..cfg.clone()
        },
        content_hash: content_hash(&csv_bytes),
    };
    fs::write(dir.join(RECORDS), &csv_bytes)?;
    fs::write(dir.join(MANIFEST), pretty_json(&manifest)?)?;
    fs::write(dir.join(SUMMARY), pretty_json(summary)?)?;
    Ok(manifest)
}

/// Writes limit draws as `draw_index,functional,value` rows.
pub fn write_limit_csv(path: &Path, dist: &ZDistribution, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::OutputExists(path.display().to_string()));
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["draw_index", "functional", "value"])?;
    for (i, d) in dist.draws.iter().enumerate() {
        let f = &d.functionals;
        let mut row =
            |name: &str, v: f64| w.write_record([i.to_string(), name.into(), v.to_string()]);
        row("m_total", f.m_total)?;
        row("m_plus", f.m_plus)?;
        row("m_minus", f.m_minus)?;
        row("objective", d.objective)?;
        for (k, s) in f.shifts.iter().enumerate() {
            row(&format!("shift_{k}"), *s)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    fs::write(path, bytes)?;
    Ok(())
}
