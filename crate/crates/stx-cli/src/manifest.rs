//! The run manifest: a deterministic record of what a run was configured
//! as (by hash) and what it produced. No timestamps — two identical runs
//! write identical manifests.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
pub struct Manifest {
    /// SHA-256 of the canonical effective-config text.
    pub config_sha256: String,
    pub stx_version: &'static str,
    pub cli_version: &'static str,
    pub structures: Vec<String>,
    pub formats: String,
    /// Everything in the output directory except this manifest, as sorted
    /// forward-slash relative paths.
    pub artifacts: Vec<String>,
}

pub fn config_hash(cfg: &PipelineConfig) -> String {
    let digest = Sha256::digest(cfg.effective_text().as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Builds the manifest by walking the output directory.
pub fn build(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut artifacts = Vec::new();
    walk(&cfg.out, Path::new(""), &mut artifacts)
        .map_err(|e| CliError::validation("manifest", format!("cannot list outputs: {e}")))?;
    artifacts.retain(|p| p != "manifest.json");
    artifacts.sort_unstable();
    Ok(Manifest {
        config_sha256: config_hash(cfg),
        stx_version: stx::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        structures: cfg.structures.iter().map(|s| s.to_string()).collect(),
        formats: cfg
            .effective_text()
            .lines()
            .find_map(|l| l.strip_prefix("formats = ").map(str::to_string))
            .unwrap_or_default(),
        artifacts,
    })
}

fn walk(root: &Path, rel: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(root.join(rel))?
        .collect::<std::io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let sub = rel.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            walk(root, &sub, out)?;
        } else {
            out.push(
                sub.components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/"),
            );
        }
    }
    Ok(())
}
