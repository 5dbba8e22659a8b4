use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::table::{write_atomic, Format};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionInfo {
    pub name: String,
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// What the file holds: `trajectory`, `density`, `distances`,
    /// `histogram` or `scenario`.
    pub role: String,
    /// Relative to the run directory.
    pub path: String,
    pub sha256: String,
}

/// Summary of one `run`, written last so its presence marks a complete run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_name: Option<String>,
    /// SHA-256 of the normalized scenario serialized as TOML.
    pub scenario_sha256: String,
    pub engine: String,
    pub seed: u64,
    pub trials: usize,
    pub format: Format,
    pub n_cells: Option<usize>,
    pub populations: Vec<String>,
    pub partitions: Vec<PartitionInfo>,
    pub files: Vec<FileEntry>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Data {
            path,
            message: e.to_string(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn file(&self, role: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.role == role)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_entry(dir: &Path, role: &str, name: &str) -> Result<FileEntry, CliError> {
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(|source| CliError::Io { path, source })?;
    Ok(FileEntry {
        role: role.into(),
        path: name.into(),
        sha256: sha256_hex(&bytes),
    })
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
}
