//! Provenance manifests: a JSON echo of the configuration plus digests of
//! every input a command consumed, so any artifact can be traced back to
//! the exact bytes that produced it.
//!
//! Manifests carry no timestamps or host details — rerunning a command with
//! the same inputs rewrites the same bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::harness::config::RunConfig;
use crate::tasks::TaskSpec;

/// Reproducibility manifest written next to a command's artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Subcommand that produced the artifacts.
    pub command: String,
    /// Crate version compiled into the binary.
    pub package_version: String,
    /// Digest prefix of the serialized run configuration.
    pub config_hash: String,
    /// Digest of the model weights the command used, when it loaded any.
    pub model_digest: Option<String>,
    /// Per-task digests over the serialized example pairs.
    pub task_digests: BTreeMap<String, String>,
    /// Full configuration echo.
    pub config: RunConfig,
}

impl Provenance {
    /// Manifest skeleton for one command; digests are filled in by the
    /// caller as inputs get loaded.
    ///
    /// # Errors
    /// Propagates configuration serialization failures.
    pub fn new(command: &str, config: &RunConfig) -> Result<Provenance> {
        Ok(Provenance {
            command: command.to_string(),
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.config_hash()?,
            model_digest: None,
            task_digests: BTreeMap::new(),
            config: config.clone(),
        })
    }

    /// Records the digests for every named task.
    ///
    /// # Errors
    /// Propagates pair serialization failures.
    pub fn record_tasks(&mut self, tasks: &[&TaskSpec]) -> Result<()> {
        for task in tasks {
            self.task_digests
                .insert(task.name.clone(), task_digest(task)?);
        }
        Ok(())
    }
}

/// Hex digest over a task's serialized example pairs.
///
/// # Errors
/// Propagates serialization failures.
pub fn task_digest(task: &TaskSpec) -> Result<String> {
    let canonical = serde_json::to_string(&task.pairs)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes `provenance.json` into `out_dir` and returns its path.
///
/// # Errors
/// I/O and serialization errors pass through.
pub fn write_provenance(provenance: &Provenance, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("provenance.json");
    let mut text = serde_json::to_string_pretty(provenance)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
