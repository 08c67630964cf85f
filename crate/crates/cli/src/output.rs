use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinmarket::io;

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub rng: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Tracks what a command writes into its output directory.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    started: Instant,
    started_unix: u64,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        })
    }

    /// Path for a new output file, recorded for the manifest.
    pub fn path(&mut self, name: &str) -> Result<PathBuf, CliError> {
        let p = self.dir.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(p)
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let p = self.path(name)?;
        io::write_csv_file(&p, rows).map_err(runtime)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let p = self.path(name)?;
        io::write_json(&p, value).map_err(runtime)
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let p = self.path(name)?;
        fs::write(&p, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))
    }

    /// Writes config.json and the manifest listing every recorded file.
    pub fn finish(mut self, command: &str, config: RunConfig, seeds: Vec<u64>) -> Result<RunManifest, CliError> {
        self.json(CONFIG, &config)?;
        let mut files = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let p = self.dir.join(name);
            let bytes = fs::metadata(&p).map(|m| m.len()).unwrap_or(0);
            files.push(FileEntry { path: name.clone(), sha256: sha256_file(&p)?, bytes });
        }
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            rng: spinmarket::rng::RNG_ALGORITHM.to_string(),
            config,
            seeds,
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            files,
        };
        io::write_json(&self.dir.join(MANIFEST), &manifest).map_err(runtime)?;
        Ok(manifest)
    }
}

pub fn runtime(e: spinmarket::Error) -> CliError {
    CliError::Runtime(e.to_string())
}
