//! Deterministic artifact writing: CSV curves and reports with a seed +
//! config-digest header line, JSON reports, and a manifest with content
//! digests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub struct ArtifactSink {
    dir: PathBuf,
    seed: u64,
    config_digest: String,
    files: Vec<FileRecord>,
    started: Instant,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool_version: String,
    pub seed: u64,
    pub config_digest: String,
    pub config: ExperimentConfig,
    pub wall_time_secs: f64,
    pub files: Vec<FileRecord>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of the effective config (canonical JSON form). The output
/// directory is not part of the semantics, so runs into different
/// directories stay byte-identical.
pub fn config_digest(config: &ExperimentConfig) -> String {
    let mut canonical = config.clone();
    canonical.out_dir = None;
    sha256_hex(
        serde_json::to_string(&canonical)
            .expect("config serializes")
            .as_bytes(),
    )
}

impl ArtifactSink {
    pub fn create(dir: &Path, seed: u64, digest: &str) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactSink {
            dir: dir.to_path_buf(),
            seed,
            config_digest: digest.to_string(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path)?;
        file.write_all(bytes)?;
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// CSV with the seed/config header comment line; rows are written with
    /// shortest round-trip float formatting.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &str,
        rows: &[Vec<f64>],
    ) -> std::io::Result<()> {
        let mut text = format!(
            "# seed={} config_digest={}\n{header}\n",
            self.seed, self.config_digest
        );
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.record(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.record(name, text.as_bytes())
    }

    /// Write the manifest and return it. The manifest itself is not listed
    /// in the file digests (it carries the wall time).
    pub fn finish(
        self,
        experiment: &str,
        config: &ExperimentConfig,
        verdicts: Vec<Verdict>,
    ) -> std::io::Result<RunManifest> {
        let pass = verdicts.iter().all(|v| v.pass);
        let manifest = RunManifest {
            experiment: experiment.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            config_digest: self.config_digest.clone(),
            config: config.clone(),
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            files: self.files.clone(),
            verdicts,
            pass,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}
