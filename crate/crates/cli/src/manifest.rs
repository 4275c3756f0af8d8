//! Run manifests: enough to re-run a command and check that its primary
//! output is byte-identical.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Cli, CmdError, Command};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Sanitized argument vector (no --out / --manifest, which do not affect
    /// the primary bytes).
    pub args: Vec<String>,
    pub seed: u64,
    pub tool_version: String,
    pub wall_time_ms: u128,
    /// sha256 of the primary output bytes, hex.
    pub output_digest: String,
}

pub fn digest(primary: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(primary.as_bytes());
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in out {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Entropy { .. } => "entropy",
        Command::BetaSearch { .. } => "beta-search",
        Command::BoundTable { .. } => "bound-table",
        Command::Verify { .. } => "verify",
        Command::Replay { .. } => "replay",
    }
}

/// The argument vector that reproduces the primary output: everything except
/// the output destinations.
pub fn sanitized_args(cli: &Cli) -> Vec<String> {
    let mut args = Vec::new();
    if let Some(seed) = cli.seed {
        args.push("--seed".into());
        args.push(seed.to_string());
    }
    if let Some(workers) = cli.workers {
        args.push("--workers".into());
        args.push(workers.to_string());
    }
    match cli.format {
        None => {}
        Some(crate::OutputFormat::Json) => {
            args.push("--format".into());
            args.push("json".into());
        }
        Some(crate::OutputFormat::Csv) => {
            args.push("--format".into());
            args.push("csv".into());
        }
    }
    match &cli.command {
        Command::Entropy { dist } => {
            args.push("entropy".into());
            args.push(dist.display().to_string());
        }
        Command::BetaSearch {
            rset,
            rset_file,
            config,
            functional,
        } => {
            args.push("beta-search".into());
            if let Some(r) = rset {
                args.push("--rset".into());
                args.push(r.clone());
            }
            if let Some(f) = rset_file {
                args.push("--rset-file".into());
                args.push(f.display().to_string());
            }
            if let Some(c) = config {
                args.push("--config".into());
                args.push(c.display().to_string());
            }
            args.push("--functional".into());
            args.push(functional.clone());
        }
        Command::BoundTable { beta, d_max } => {
            args.push("bound-table".into());
            args.push("--beta".into());
            args.push(beta.clone());
            args.push("--d-max".into());
            args.push(d_max.to_string());
        }
        Command::Verify { suite, p_cap } => {
            args.push("verify".into());
            args.push("--suite".into());
            args.push(suite.clone());
            args.push("--p-cap".into());
            args.push(p_cap.to_string());
        }
        Command::Replay { manifest } => {
            args.push("replay".into());
            args.push(manifest.display().to_string());
        }
    }
    args
}

fn default_path(cli: &Cli) -> PathBuf {
    match (&cli.manifest, &cli.out) {
        (Some(path), _) => path.clone(),
        (None, Some(out)) => {
            let mut p = out.as_os_str().to_owned();
            p.push(".manifest.json");
            PathBuf::from(p)
        }
        (None, None) => PathBuf::from("kakeya-run.manifest.json"),
    }
}

pub fn write_manifest(cli: &Cli, primary: &str, elapsed: Duration) -> std::io::Result<()> {
    let manifest = RunManifest {
        command: command_name(&cli.command).to_string(),
        args: sanitized_args(cli),
        seed: cli.seed.unwrap_or(0),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: elapsed.as_millis(),
        output_digest: digest(primary),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(default_path(cli), json + "\n")
}

pub fn load(path: &Path) -> Result<RunManifest, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CmdError::Usage(format!("malformed manifest {}: {e}", path.display())))
}
