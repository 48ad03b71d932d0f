//! Run manifests: every command writes one beside its outputs, recording
//! what produced them.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::formats::save_json;
use crate::AppResult;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// FNV-1a hash of the run's inputs; stable for identical inputs.
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
}

pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("{h:016x}")
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub struct ManifestBuilder {
    command: String,
    digest_input: Vec<u8>,
    seed: u64,
    started: u64,
    outputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            digest_input: Vec::new(),
            seed,
            started: now_unix(),
            outputs: Vec::new(),
        }
    }

    /// Feed input bytes (config files, canonical argument strings) into the
    /// digest.
    pub fn digest(&mut self, bytes: &[u8]) -> &mut Self {
        self.digest_input.extend_from_slice(bytes);
        self
    }

    pub fn add_output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    /// Write `<primary output>.manifest.json`.
    pub fn write(&self, beside: &Path) -> AppResult<PathBuf> {
        let manifest = RunManifest {
            command: self.command.clone(),
            config_digest: fnv1a_hex(&self.digest_input),
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started,
            finished_unix: now_unix(),
            outputs: self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
        };
        let path = beside.with_file_name(format!(
            "{}.manifest.json",
            beside
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| String::from("run"))
        ));
        save_json(&path, &manifest)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        assert_eq!(fnv1a_hex(b"abc"), fnv1a_hex(b"abc"));
        assert_ne!(fnv1a_hex(b"abc"), fnv1a_hex(b"abd"));
    }
}
