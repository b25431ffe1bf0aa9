//! Output directories and manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::experiments::Artifacts;

/// Provenance of one output directory. Holds no timestamps, so identical
/// runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub version: String,
    /// The effective configuration, with command-line overrides applied.
    pub config: ExperimentConfig,
    pub rate_table_digest: Option<String>,
    /// `(file name, sha256)` of every artifact, in write order.
    pub files: Vec<(String, String)>,
    pub replica_errors: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("value serialises");
    out.push(b'\n');
    out
}

/// `<output>/<kind>/<label>`, or a Unix-seconds label when none is given.
pub fn run_directory(output: &Path, kind: &str, label: Option<&str>) -> PathBuf {
    let label = match label {
        Some(l) => l.to_string(),
        None => {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            format!("run-{secs}")
        }
    };
    output.join(kind).join(label)
}

/// Writes `raw.csv`, `report.json`, extras, `errors.csv` when needed, and
/// finally `manifest.json`.
pub fn write_artifacts(
    dir: &Path,
    artifacts: &Artifacts,
    config: &ExperimentConfig,
    kind: &str,
    rate_table_digest: Option<String>,
) -> std::io::Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> std::io::Result<()> {
        std::fs::write(dir.join(name), bytes)?;
        files.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    };
    put("raw.csv", artifacts.raw_csv.as_bytes())?;
    put("report.json", &json_bytes(&artifacts.report))?;
    for (name, bytes) in &artifacts.extra {
        put(name, bytes)?;
    }
    if !artifacts.errors.is_empty() {
        let mut csv = String::from("replica,seed,error\n");
        for e in &artifacts.errors {
            csv.push_str(&format!("{},{},\"{}\"\n", e.replica, e.seed, e.message.replace('"', "'")));
        }
        put("errors.csv", csv.as_bytes())?;
    }
    let manifest = Manifest {
        kind: kind.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        rate_table_digest,
        files,
        replica_errors: artifacts.errors.len(),
    };
    std::fs::write(dir.join("manifest.json"), json_bytes(&manifest))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> std::io::Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
