use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the run directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Inventory of one run directory. Timestamps are the only non-deterministic
/// content.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub subcommand: String,
    pub config: Option<String>,
    pub scenario: serde_json::Value,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub exit_code: i32,
    pub files: Vec<FileEntry>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let mut file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = file.read(&mut buf).with_context(|| format!("reading {}", path.display()))?;
        if n == 0 {
            break;
        }
        total += n as u64;
        hasher.update(&buf[..n]);
    }
    Ok((total, hex::encode(hasher.finalize())))
}

/// Files written by a command, in write order.
#[derive(Debug)]
pub struct OutputLog {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl OutputLog {
    pub fn new(root: &Path) -> Self {
        OutputLog {
            root: root.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn record(&mut self, path: PathBuf) {
        if !self.files.contains(&path) {
            self.files.push(path);
        }
    }

    pub fn record_pair(&mut self, pair: (PathBuf, PathBuf)) {
        self.record(pair.0);
        self.record(pair.1);
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))?;
        self.record(path);
        Ok(())
    }

    pub fn entries(&self) -> Result<Vec<FileEntry>> {
        self.files
            .iter()
            .map(|p| {
                let (bytes, sha256) = sha256_file(p)?;
                let rel = p.strip_prefix(&self.root).unwrap_or(p);
                Ok(FileEntry {
                    path: rel.to_string_lossy().replace('\\', "/"),
                    bytes,
                    sha256,
                })
            })
            .collect()
    }
}

impl RunManifest {
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let path = root.join(MANIFEST_NAME);
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
