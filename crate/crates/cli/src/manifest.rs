use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::{run_command, Command};
use crate::config::Config;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingCheck {
    pub estimate: String,
    pub p_hat: f64,
    pub p_hat_doubled: f64,
    pub half_width: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: Command,
    pub full_config: Config,
    pub master_seed: u64,
    pub replica_count: u64,
    pub started_at: String,
    pub finished_at: String,
    pub output_files: Vec<OutputFile>,
    pub warnings: Vec<String>,
    /// `None` unless the window-doubling check was requested.
    pub window_doubling: Option<Vec<DoublingCheck>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// `<command>-<seed>-<first 8 hex digits of the config digest>`, with a
/// numeric suffix if that directory already exists.
pub fn run_dir(out: &Path, cmd: Command, cfg: &Config) -> Result<PathBuf> {
    let canon = serde_json::to_vec(&(cmd, cfg))?;
    let base = format!("{}-{}-{}", cmd.name(), cfg.seed, &sha256_hex(&canon)[..8]);
    let mut dir = out.join(&base);
    let mut k = 1;
    while dir.exists() {
        dir = out.join(format!("{base}-{k}"));
        k += 1;
    }
    Ok(dir)
}

/// Runs `cmd`, writes its files and the manifest into a fresh run
/// directory under `out`, and returns that directory.
pub fn execute(cmd: Command, cfg: &Config, out: &Path, window_doubling: bool) -> Result<(PathBuf, RunManifest)> {
    cfg.validate()?;
    let started_at = now();
    let outcome = run_command(cmd, cfg)?;
    let mut warnings = Vec::new();
    let rate = outcome.excluded as f64 / outcome.replicas as f64;
    if rate > cfg.contamination_warn {
        warnings.push(format!(
            "boundary contamination: {} of {} replicas excluded ({rate:.4} > {})",
            outcome.excluded, outcome.replicas, cfg.contamination_warn
        ));
    }
    let doubling = if window_doubling {
        let wide = run_command(cmd, &cfg.doubled_window())?;
        let checks: Vec<DoublingCheck> = outcome
            .headline
            .iter()
            .zip(&wide.headline)
            .map(|((name, a), (_, b))| DoublingCheck {
                estimate: name.clone(),
                p_hat: a.p_hat,
                p_hat_doubled: b.p_hat,
                half_width: a.half_width(),
                stable: (a.p_hat - b.p_hat).abs() < a.half_width(),
            })
            .collect();
        if checks.is_empty() {
            warnings.push(format!("window doubling: {} has no proportion estimates to compare", cmd));
        }
        if checks.iter().any(|c| !c.stable) {
            warnings.push("window doubling moved an estimate by more than its CI half-width".into());
        }
        Some(checks)
    } else {
        None
    };
    let dir = run_dir(out, cmd, cfg)?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut output_files = Vec::new();
    for (name, bytes) in &outcome.files {
        fs::write(dir.join(name), bytes).with_context(|| format!("writing {name}"))?;
        output_files.push(OutputFile {
            path: name.clone(),
            sha256: sha256_hex(bytes),
        });
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: cmd,
        full_config: cfg.clone(),
        master_seed: cfg.seed,
        replica_count: cfg.replicas,
        started_at,
        finished_at: now(),
        output_files,
        warnings,
        window_doubling: doubling,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_vec_pretty(&manifest)?)?;
    Ok((dir, manifest))
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Re-runs a manifest in memory and lists the files whose digest differs.
pub fn replay(manifest: &RunManifest) -> Result<Vec<String>> {
    if manifest.full_config.seed != manifest.master_seed || manifest.full_config.replicas != manifest.replica_count {
        bail!("manifest seed or replica count disagrees with its config");
    }
    let outcome = run_command(manifest.command, &manifest.full_config)?;
    let mut mismatched = Vec::new();
    for f in &manifest.output_files {
        match outcome.files.iter().find(|(n, _)| *n == f.path) {
            Some((_, bytes)) if sha256_hex(bytes) == f.sha256 => {}
            _ => mismatched.push(f.path.clone()),
        }
    }
    if outcome.files.len() != manifest.output_files.len() {
        mismatched.push("<file set>".into());
    }
    Ok(mismatched)
}
