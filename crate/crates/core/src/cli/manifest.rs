use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            parameters,
            seed,
            version: VERSION.to_string(),
            outputs: Vec::new(),
        }
    }

    /// Digest `files` and write the manifest to `path`. Paths are stored
    /// relative to the manifest's directory.
    pub fn write(mut self, path: &Path, files: &[PathBuf]) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        for f in files {
            let rel = f.strip_prefix(base).unwrap_or(f).to_path_buf();
            self.outputs.push(OutputFile {
                path: rel,
                sha256: sha256_file(f)?,
            });
        }
        fs::write(path, serde_json::to_string_pretty(&self)? + "\n")?;
        Ok(self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Files whose current digest differs from the recorded one.
    pub fn stale(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for f in &self.outputs {
            let p = dir.join(&f.path);
            if !p.exists() || sha256_file(&p)? != f.sha256 {
                out.push(f.path.clone());
            }
        }
        Ok(out)
    }
}
