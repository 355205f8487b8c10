//! Per-run manifest: a hash for every artifact plus the config that made it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub sha256: String,
    pub bytes: u64,
    /// Command that wrote the file.
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Seconds since the epoch of the last write; absent under `--no-timestamps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub updated_unix: Option<u64>,
    /// Training priors recorded by `prepare`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub priors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub train_counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_counts: Vec<usize>,
    #[serde(default)]
    pub files: BTreeMap<String, FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    /// Existing manifest in `dir`, or an empty one.
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("malformed manifest {}", path.display()))
    }

    /// Hashes `dir/name` and records it.
    pub fn record(&mut self, dir: &Path, name: &str, command: &str, config_hash: &str) -> Result<()> {
        let bytes = fs::read(dir.join(name)).with_context(|| format!("cannot hash {name}"))?;
        self.files.insert(
            name.to_string(),
            FileEntry {
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
                command: command.into(),
                config_hash: config_hash.into(),
                code_version: CODE_VERSION.into(),
            },
        );
        Ok(())
    }

    pub fn save(&mut self, dir: &Path, timestamps: bool) -> Result<()> {
        self.updated_unix = timestamps.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
        let text = toml::to_string(self)?;
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn hash(&self) -> String {
        sha256_hex(toml::to_string(self).expect("manifest serializes").as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn record_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), "x\n").unwrap();
        let mut m = Manifest::open(dir.path()).unwrap();
        m.priors = vec![0.25, 0.75];
        m.record(dir.path(), "a.csv", "prepare", "h").unwrap();
        m.save(dir.path(), false).unwrap();
        let back = Manifest::open(dir.path()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.updated_unix, None);
        assert_eq!(back.files["a.csv"].bytes, 2);
    }
}
