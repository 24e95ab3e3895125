//! Output files of one run and the manifest that records their hashes.

use crate::config::ExperimentConfig;
use crate::error::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ConfigSource {
    pub path: Option<String>,
    pub sha256: Option<String>,
    pub overrides: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub seed: u64,
    pub inputs: ConfigSource,
    /// The fully resolved configuration the run used.
    pub config: &'a ExperimentConfig,
    pub outputs: Vec<OutputEntry>,
}

/// Collects the files of a run; every file is written once, in full.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, &bytes).map_err(|e| CliError::io(path.display(), e))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(OutputEntry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Writes through an `io::Write` callback into memory first.
    pub fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::io(name, e))?;
        self.write(name, buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable output");
        bytes.push(b'\n');
        self.write(name, bytes)
    }

    /// Writes `manifest.json`, listing the outputs sorted by name.
    pub fn finish(
        mut self,
        experiment: &'static str,
        config: &ExperimentConfig,
        inputs: ConfigSource,
    ) -> Result<Vec<OutputEntry>, CliError> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            seed: config.seed,
            inputs,
            config,
            outputs: self.entries.clone(),
        };
        let entries = self.entries.clone();
        self.write_json(MANIFEST, &manifest)?;
        Ok(entries)
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
    fn manifest_lists_sorted_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::create(dir.path()).unwrap();
        a.write("b.csv", b"x\n1\n".to_vec()).unwrap();
        a.write("a.csv", b"y\n".to_vec()).unwrap();
        let config = ExperimentConfig::resolve("", &[], None).unwrap();
        let inputs = ConfigSource {
            path: None,
            sha256: None,
            overrides: vec![],
        };
        let out = a.finish("spectrum", &config, inputs).unwrap();
        assert_eq!(out[0].path, "a.csv");
        let text = std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(json["outputs"][1]["sha256"], sha256_hex(b"x\n1\n"));
        assert_eq!(json["seed"], 1);
    }
}
