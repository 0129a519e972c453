//! CSV tables and run manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{KvarError, Result};
use crate::experiments::{SlopeFit, Sweep};
use crate::kvariance::KVarEstimate;

/// 17 significant digits: round-trips every `f64`.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| KvarError::Shape(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn estimate_csv(est: &KVarEstimate) -> Result<String> {
    let radius = est.mcdiarmid.map(|b| real(b.radius)).unwrap_or_default();
    table(
        &["k", "d", "n", "estimate", "stderr", "mcdiarmid_radius"],
        [vec![
            est.k.to_string(),
            est.d.to_string(),
            est.n_trials.to_string(),
            real(est.estimate),
            real(est.stderr),
            radius,
        ]],
    )
}

/// `elapsed_seconds` is last so that it can be cut off before comparing runs.
pub fn sweep_csv(sweep: &Sweep) -> Result<String> {
    table(
        &["label", "k", "estimate", "stderr", "n", "elapsed_seconds"],
        sweep.records.iter().map(|r| {
            vec![
                sweep.label.clone(),
                r.k.to_string(),
                real(r.estimate),
                real(r.stderr),
                r.n.to_string(),
                format!("{:.6}", r.elapsed_seconds),
            ]
        }),
    )
}

pub fn fits_csv(fits: &[(String, SlopeFit)]) -> Result<String> {
    table(
        &["label", "slope", "intercept", "r_squared", "k_min", "k_max", "points"],
        fits.iter().map(|(label, f)| {
            vec![
                label.clone(),
                real(f.slope),
                real(f.intercept),
                real(f.r_squared),
                f.k_min.to_string(),
                f.k_max.to_string(),
                f.points.to_string(),
            ]
        }),
    )
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| KvarError::io(path, e))
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Effective arguments, with any config file already expanded.
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub master_seed: Option<u64>,
    pub started_unix_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(path, &(json + "\n"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| KvarError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            KvarError::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e))
        })
    }
}
