//! Run manifests: one sidecar `<out>.manifest.json` per invocation that
//! writes files, recording the config, tool version, seed, timestamps and
//! SHA-256 digests of every input and output.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub tool: String,
    pub tool_version: String,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> io::Result<FileDigest> {
    let bytes = fs::read(path)?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Bookkeeping for one command invocation.
pub struct Run {
    command: String,
    config: Value,
    seed: u64,
    started: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    manifest: Option<PathBuf>,
}

impl Run {
    pub fn new(command: &str, config: Value, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config,
            seed,
            started: now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            manifest: None,
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// Manifest path for this run; fixed by the first output written.
    fn manifest_for(&mut self, out: &Path) -> PathBuf {
        self.manifest.get_or_insert_with(|| manifest_path(out)).clone()
    }

    /// Writes `value` as pretty JSON with a top-level `"manifest"` reference.
    pub fn write_json(&mut self, path: &Path, value: &impl Serialize) -> io::Result<()> {
        let manifest = self.manifest_for(path);
        let mut v = serde_json::to_value(value).map_err(io::Error::other)?;
        if let Value::Object(map) = &mut v {
            map.insert("manifest".into(), Value::String(manifest.display().to_string()));
        }
        let text = serde_json::to_string_pretty(&v).map_err(io::Error::other)?;
        fs::write(path, text + "\n")?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Writes a text artifact (CSV) with a leading `# manifest:` comment line.
    pub fn write_text(&mut self, path: &Path, body: &str) -> io::Result<()> {
        let manifest = self.manifest_for(path);
        fs::write(path, format!("# manifest: {}\n{body}", manifest.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Writes the manifest if anything was written. Returns its path.
    pub fn finish(self) -> io::Result<Option<PathBuf>> {
        let Some(path) = self.manifest else {
            return Ok(None);
        };
        let digests = |paths: &[PathBuf]| -> io::Result<Vec<FileDigest>> {
            paths.iter().map(|p| sha256_file(p)).collect()
        };
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            tool: "cubesec".into(),
            tool_version: TOOL_VERSION.into(),
            seed: self.seed,
            started: self.started,
            finished: now(),
            inputs: digests(&self.inputs)?,
            outputs: digests(&self.outputs)?,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        fs::write(&path, text + "\n")?;
        Ok(Some(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_name() {
        assert_eq!(
            manifest_path(Path::new("out/result.json")),
            PathBuf::from("out/result.json.manifest.json")
        );
    }

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap().sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
