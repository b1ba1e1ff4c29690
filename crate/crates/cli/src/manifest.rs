//! Content digests and per-stage manifests.
//!
//! A stage manifest records the stage's configuration digest, the digests of
//! the files it consumed and of every file it wrote (paths relative to the
//! run directory). A stage whose manifest still matches is skipped on resume.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uqfraud::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Digest of the canonical JSON encoding of `value`.
pub fn digest_of<T: Serialize>(value: &T) -> String {
    sha256_hex(
        serde_json::to_string(value)
            .expect("config serializes")
            .as_bytes(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageManifest {
    pub version: u32,
    pub stage: String,
    pub seed: u64,
    pub config_digest: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl StageManifest {
    pub fn new(stage: &str, seed: u64, config_digest: String) -> Self {
        Self {
            version: MANIFEST_VERSION,
            stage: stage.to_string(),
            seed,
            config_digest,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::format(0, format!("manifest {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Hashes each output (relative to `root`) into the manifest.
    pub fn record_outputs<'a>(
        &mut self,
        root: &Path,
        rel: impl IntoIterator<Item = &'a str>,
    ) -> Result<()> {
        for r in rel {
            self.outputs
                .insert(r.to_string(), sha256_file(&root.join(r))?);
        }
        Ok(())
    }

    /// True when `existing` was produced from the same configuration and
    /// inputs and all of its outputs are still on disk unchanged.
    pub fn still_valid(&self, existing: &StageManifest, root: &Path) -> bool {
        existing.version == self.version
            && existing.stage == self.stage
            && existing.seed == self.seed
            && existing.config_digest == self.config_digest
            && existing.inputs == self.inputs
            && !existing.outputs.is_empty()
            && existing
                .outputs
                .iter()
                .all(|(rel, digest)| sha256_file(&root.join(rel)).is_ok_and(|d| &d == digest))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validity_tracks_outputs_and_inputs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "hello").unwrap();
        let mut m = StageManifest::new("s", 1, "cfg".into());
        m.inputs.insert("in".into(), "x".into());
        m.record_outputs(dir.path(), ["a.txt"]).unwrap();
        let mp = dir.path().join("m.json");
        m.save(&mp).unwrap();
        let loaded = StageManifest::load(&mp).unwrap();
        assert_eq!(loaded, m);

        let fresh = {
            let mut f = StageManifest::new("s", 1, "cfg".into());
            f.inputs.insert("in".into(), "x".into());
            f
        };
        assert!(fresh.still_valid(&loaded, dir.path()));
        let mut other_input = fresh.clone();
        other_input.inputs.insert("in".into(), "y".into());
        assert!(!other_input.still_valid(&loaded, dir.path()));
        std::fs::write(dir.path().join("a.txt"), "changed").unwrap();
        assert!(!fresh.still_valid(&loaded, dir.path()));
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
