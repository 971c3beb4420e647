use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::SCHEMA_VERSION;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Content hashes of every file a run wrote. No wall-clock fields, so
/// repeating a run reproduces the manifest byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub commands: BTreeSet<String>,
    pub files: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Option<Self>> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|source| Error::Json { path, source })
    }

    /// Adds `files` (names relative to `dir`) under `command`. Entries from
    /// an earlier run with another seed or config are discarded.
    pub fn record(
        dir: &Path,
        command: &str,
        seed: u64,
        config_sha256: &str,
        files: &[String],
    ) -> Result<Self> {
        let fresh = || Manifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_sha256: config_sha256.to_string(),
            commands: BTreeSet::new(),
            files: BTreeMap::new(),
        };
        let mut m = match Self::read(dir)? {
            Some(m)
                if m.seed == seed
                    && m.config_sha256 == config_sha256
                    && m.tool_version == fresh().tool_version =>
            {
                m
            }
            _ => fresh(),
        };
        m.commands.insert(command.to_string());
        for name in files {
            m.files.insert(name.clone(), sha256_file(&dir.join(name))?);
        }
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&m).map_err(|source| Error::Json {
            path: path.clone(),
            source,
        })?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(m)
    }

    /// Names of listed files whose current content no longer matches.
    pub fn stale_files(&self, dir: &Path) -> Result<Vec<String>> {
        let mut stale = Vec::new();
        for (name, hash) in &self.files {
            let path = dir.join(name);
            if !path.is_file() || sha256_file(&path)? != *hash {
                stale.push(name.clone());
            }
        }
        Ok(stale)
    }
}
