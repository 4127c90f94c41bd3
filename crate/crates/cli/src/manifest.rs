//! Run manifests: the sidecar JSON that makes a CSV reproducible.
//!
//! A manifest carries the fully resolved config and the generator id, which
//! together pin the byte content of the tick CSV; the digest lets a replay
//! verify it landed on the same final state.

use dealer_model::engine::{RunConfig, TickSeries};
use serde::{Deserialize, Serialize};
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Tool name and version that produced the run.
    pub tool: String,
    /// Random generator id the run drew from.
    pub rng_algorithm: String,
    /// Fully resolved run configuration.
    pub config: RunConfig,
    /// Overrides applied on top of the preset/config file, in order.
    pub overrides: Vec<String>,
    pub n_deals: u64,
    pub initial_sum_bids: f64,
    /// FNV-1a of the final bid vector, 16 hex digits.
    pub final_state_digest: String,
    pub no_deal_warning: bool,
    /// File name of the tick CSV this manifest describes.
    pub csv_file: String,
}

impl RunManifest {
    pub fn for_series(series: &TickSeries, overrides: Vec<String>, csv_path: &Path) -> Self {
        Self {
            tool: format!("dealer-sim {}", env!("CARGO_PKG_VERSION")),
            rng_algorithm: series.rng_algorithm.to_string(),
            config: series.config_echo.clone(),
            overrides,
            n_deals: series.records.len() as u64,
            initial_sum_bids: series.initial_sum_bids,
            final_state_digest: format!("{:016x}", series.final_state_digest),
            no_deal_warning: series.no_deal_warning,
            csv_file: csv_path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
        }
    }
}

/// Sidecar path: `out.csv` -> `out.manifest.json`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(path, text)
}

pub fn read_manifest(path: &Path) -> io::Result<RunManifest> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
