use std::io::Write;
use std::path::{Path, PathBuf};

use scfde::harness::SimConfig;
use serde::{Deserialize, Serialize};

/// Experiment axes that are not part of [`SimConfig`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_norm: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relays: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ebn0_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
}

/// Record of one run. Passing it back through `--config` repeats the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub master_seed: u64,
    pub config: SimConfig,
    pub sweep: Sweep,
    pub duration_secs: f64,
    pub outputs: Vec<PathBuf>,
}

/// `results/ber.csv` -> `results/ber.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.manifest.json"))
}

pub fn write(path: &Path, manifest: &RunManifest) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut tmp, manifest)?;
    tmp.write_all(b"\n")?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_csv() {
        assert_eq!(manifest_path(Path::new("out/ber.csv")), PathBuf::from("out/ber.manifest.json"));
        assert_eq!(manifest_path(Path::new("taps")), PathBuf::from("taps.manifest.json"));
    }
}
