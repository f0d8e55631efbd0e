use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use crate::error::{Error, Result};

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hash over the contents of several files, in the given order.
pub fn sha256_files(paths: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for p in paths {
        let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

/// Input and output file hashes of one command run, keyed by path.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, config: &PipelineConfig) -> Self {
        Manifest {
            command: command.into(),
            config_hash: config.hash(),
            ..Manifest::default()
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Records outputs relative to `dir` when they live under it.
    pub fn outputs(&mut self, dir: &Path, paths: &[PathBuf]) -> Result<()> {
        for p in paths {
            let key = p.strip_prefix(dir).unwrap_or(p).display().to_string();
            self.outputs.insert(key, sha256_file(p)?);
        }
        Ok(())
    }

    /// Writes `config.json` and `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path, config: &PipelineConfig) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let cfg = dir.join("config.json");
        std::fs::write(&cfg, config.to_json()).map_err(|e| Error::io(&cfg, e))?;
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(&path, e))? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        std::fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn multi_file_hash_is_order_and_boundary_sensitive() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        std::fs::write(&a, "ab").unwrap();
        std::fs::write(&b, "c").unwrap();
        let ab = sha256_files(&[a.clone(), b.clone()]).unwrap();
        assert_ne!(ab, sha256_files(&[b.clone(), a.clone()]).unwrap());
        std::fs::write(&a, "a").unwrap();
        std::fs::write(&b, "bc").unwrap();
        assert_ne!(ab, sha256_files(&[a, b]).unwrap());
    }

    #[test]
    fn writes_config_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig::default();
        let out = dir.path().join("x.csv");
        std::fs::write(&out, "1\n").unwrap();
        let mut m = Manifest::new("extract", &cfg);
        m.outputs(dir.path(), &[out]).unwrap();
        m.write(dir.path(), &cfg).unwrap();
        let back: Manifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(back.outputs.contains_key("x.csv"));
        let cfg_back = PipelineConfig::read(&dir.path().join("config.json")).unwrap();
        assert_eq!(cfg_back, cfg);
    }
}
