//! Run-directory layout and JSON/JSONL persistence.
//!
//! ```text
//! <out_dir>/<scenario>/
//!   manifest.json
//!   playbooks/v<k>.json
//!   episodes/<id>.traj.jsonl
//!   episodes/<id>.trace.jsonl
//!   episodes/<id>.record.json
//!   stats.json
//!   report.txt / report.csv / plot.csv
//! ```

use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::File::create(path)?;
    for item in items {
        serde_json::to_writer(&mut file, item)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: format!("{}:{}", path.display(), idx + 1),
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn now_unix_s() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default().as_secs()
}

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Snapshot of the effective configuration.
    pub config: serde_json::Value,
    pub code_version: String,
    pub created_unix_s: u64,
    pub updated_unix_s: u64,
    /// Record files, relative to the run directory, in production order.
    pub episodes: Vec<String>,
    /// Every file the run produced, relative to the run directory.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(config: serde_json::Value) -> Self {
        let now = now_unix_s();
        Self {
            config,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix_s: now,
            updated_unix_s: now,
            episodes: Vec::new(),
            files: Vec::new(),
        }
    }
}

/// Path helpers for one scenario's run directory.
#[derive(Debug, Clone)]
pub struct RunPaths {
    root: PathBuf,
}

impl RunPaths {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn stats(&self) -> PathBuf {
        self.root.join("stats.json")
    }

    pub fn playbook(&self, version: u32) -> PathBuf {
        self.root.join("playbooks").join(format!("v{version}.json"))
    }

    pub fn trajectory(&self, episode_id: &str) -> PathBuf {
        self.root.join("episodes").join(format!("{episode_id}.traj.jsonl"))
    }

    pub fn trace(&self, episode_id: &str) -> PathBuf {
        self.root.join("episodes").join(format!("{episode_id}.trace.jsonl"))
    }

    pub fn record(&self, episode_id: &str) -> PathBuf {
        self.root.join("episodes").join(format!("{episode_id}.record.json"))
    }

    pub fn report_txt(&self) -> PathBuf {
        self.root.join("report.txt")
    }

    pub fn report_csv(&self) -> PathBuf {
        self.root.join("report.csv")
    }

    pub fn plot_csv(&self) -> PathBuf {
        self.root.join("plot.csv")
    }

    pub fn relative(&self, path: &Path) -> String {
        path.strip_prefix(&self.root).unwrap_or(path).to_string_lossy().into_owned()
    }

    /// Refuse to write into a directory that already holds run output,
    /// unless forced. A directory with a manifest can instead be resumed by
    /// callers that support it.
    pub fn ensure_writable(&self, force: bool) -> Result<()> {
        if force || !self.manifest().exists() {
            return Ok(());
        }
        Err(Error::Validation(format!(
            "run directory {} already exists; pass --force to overwrite",
            self.root.display()
        )))
    }
}

/// Derive a per-episode seed from the master seed. SplitMix64 over the
/// index keeps episode streams independent and reproducible.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("items.jsonl");
        let items = vec![1.5f64, 2.25, -3.0];
        write_jsonl(&path, &items).unwrap();
        let back: Vec<f64> = read_jsonl(&path).unwrap();
        assert_eq!(items, back);
    }

    #[test]
    fn derive_seed_is_deterministic_and_spread() {
        assert_eq!(derive_seed(7, 0), derive_seed(7, 0));
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn ensure_writable_guards_existing_runs() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::new(dir.path().join("lg4"));
        paths.ensure_writable(false).unwrap();
        write_json(&paths.manifest(), &RunManifest::new(serde_json::json!({}))).unwrap();
        assert!(paths.ensure_writable(false).is_err());
        paths.ensure_writable(true).unwrap();
    }
}
