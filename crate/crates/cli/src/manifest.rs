//! Run manifests: what was run, with which config, and checksums of
//! everything written.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use misfit_core::KvConfig;

pub const MANIFEST_NAME: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    /// The config as read, defaults not filled in.
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub versions: BTreeMap<String, String>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn load(path: &Path) -> io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// The recorded config in key-value form, ready to rerun.
    pub fn config_text(&self) -> String {
        self.config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

pub fn sha256_file(path: &Path) -> io::Result<(u64, String)> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut n = 0u64;
    loop {
        let k = f.read(&mut buf)?;
        if k == 0 {
            break;
        }
        n += k as u64;
        h.update(&buf[..k]);
    }
    Ok((n, hex::encode(h.finalize())))
}

/// An output directory that remembers what was written to it.
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl OutDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Registers `name` and returns its full path.
    pub fn record(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.path(name)
    }

    pub fn writer(&mut self, name: &str) -> io::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.record(name))?))
    }

    /// Checksums every recorded file and writes the manifest atomically.
    pub fn finish(self, subcommand: &str, config: Option<&KvConfig>, seed: Option<u64>) -> io::Result<RunManifest> {
        let mut outputs = Vec::new();
        for f in &self.files {
            let (bytes, sha256) = sha256_file(&self.root.join(f))?;
            outputs.push(OutputRecord {
                file: f.clone(),
                bytes,
                sha256,
            });
        }
        let config: BTreeMap<String, String> = config
            .map(|c| c.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
            .unwrap_or_default();
        let versions = BTreeMap::from([
            ("misfit-core".to_string(), misfit_core::VERSION.to_string()),
            ("misfit-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ]);
        let m = RunManifest {
            tool: "misfit-coarsen".into(),
            subcommand: subcommand.into(),
            argv: std::env::args().collect(),
            config,
            seed,
            versions,
            threads: rayon::current_num_threads(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs,
        };
        let tmp = self.root.join(format!(".{MANIFEST_NAME}.tmp"));
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer_pretty(&mut w, &m).map_err(io::Error::other)?;
            w.write_all(b"\n")?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        std::fs::rename(&tmp, self.root.join(MANIFEST_NAME))?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        out.writer("a.csv").unwrap().write_all(b"abc").unwrap();
        let kv = KvConfig::parse("seed = 7\nx = 1").unwrap();
        let m = out.finish("test", Some(&kv), Some(7)).unwrap();
        // sha256("abc")
        assert_eq!(
            m.outputs[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(m.seed, Some(7));
        let back = RunManifest::load(&dir.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(back, m);
        assert_eq!(KvConfig::parse(&back.config_text()).unwrap(), kv);
        assert!(!dir.path().join(format!(".{MANIFEST_NAME}.tmp")).exists());
    }
}
