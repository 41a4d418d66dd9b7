pub mod analyze;
pub mod evolve;
pub mod kernel;
pub mod sharp;

use std::path::Path;

use anyhow::Context;
use misfit_core::KvConfig;

use crate::manifest::RunManifest;

/// A key-value file, or a run manifest whose recorded config is reused.
pub fn load_config(path: &Path) -> anyhow::Result<KvConfig> {
    if path.extension().is_some_and(|e| e == "json") {
        let m = RunManifest::load(path).with_context(|| format!("reading manifest {}", path.display()))?;
        return Ok(KvConfig::parse(&m.config_text())?);
    }
    KvConfig::load(path).with_context(|| format!("reading config {}", path.display()))
}
