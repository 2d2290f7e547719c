//! Artifact directory bookkeeping: every written file is checksummed and
//! listed in `manifest.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fracwave::GridSeries64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::fieldio::{format_csv, format_field};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub files: Vec<FileEntry>,
    /// Plot series name to artifact file.
    pub series: BTreeMap<String, String>,
    pub diagnostics: BTreeMap<String, Value>,
    /// Seconds per stage; the only nondeterministic part of a run.
    pub wall_clock: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("no artifacts at {}: {e}", dir.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Artifact {
            path,
            message: e.to_string(),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Artifacts {
    dir: PathBuf,
    manifest: RunManifest,
    clock: Instant,
}

impl Artifacts {
    /// Prepares `dir`. Files listed by a previous manifest are removed; any
    /// other content makes the directory unusable.
    pub fn create(dir: &Path, experiment: &str, config: BTreeMap<String, String>) -> Result<Self> {
        let io = |what: &str, e| CliError::io(format!("{what} {}", dir.display()), e);
        if dir.join(MANIFEST).is_file() {
            let old = RunManifest::load(dir)?;
            for f in &old.files {
                let p = dir.join(&f.path);
                if p.is_file() {
                    std::fs::remove_file(&p).map_err(|e| io("cleaning", e))?;
                }
            }
            std::fs::remove_file(dir.join(MANIFEST)).map_err(|e| io("cleaning", e))?;
        }
        std::fs::create_dir_all(dir).map_err(|e| io("creating", e))?;
        if let Some(stray) = std::fs::read_dir(dir).map_err(|e| io("listing", e))?.next() {
            let stray = stray.map_err(|e| io("listing", e))?;
            return Err(CliError::Config(format!(
                "output directory {} contains {} which no previous run wrote; choose an empty directory",
                dir.display(),
                stray.file_name().to_string_lossy()
            )));
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                experiment: experiment.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config,
                files: Vec::new(),
                series: BTreeMap::new(),
                diagnostics: BTreeMap::new(),
                wall_clock: BTreeMap::new(),
            },
            clock: Instant::now(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        self.manifest.files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len() as u64,
        });
        Ok(())
    }

    pub fn field(&mut self, name: &str, g: &GridSeries64) -> Result<()> {
        self.write(name, &format_field(g))
    }

    pub fn table(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: impl IntoIterator<Item = Vec<f64>>,
    ) -> Result<()> {
        self.write(name, &format_csv(columns, rows))
    }

    pub fn series(&mut self, series: &str, file: &str) {
        self.manifest
            .series
            .insert(series.to_string(), file.to_string());
    }

    pub fn diag(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.manifest.diagnostics.insert(key.to_string(), v);
    }

    /// Records the time since the previous call under `stage`.
    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.manifest
            .wall_clock
            .insert(stage.to_string(), (now - self.clock).as_secs_f64());
        self.clock = now;
    }

    pub fn finish(self) -> Result<RunManifest> {
        let path = self.dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(&path, text + "\n")
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        Ok(self.manifest)
    }
}
