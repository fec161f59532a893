//! Run manifest: everything needed to reproduce the outputs, and nothing
//! that varies between identical runs.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io;

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'a str,
    seed: u64,
    config_sha256: String,
    config: &'a RunConfig,
    outputs: &'a [&'a str],
    result: serde_json::Value,
}

pub fn config_hash(config: &RunConfig) -> CliResult<String> {
    let text = serde_json::to_string(config).map_err(|e| CliError::Numeric(e.to_string()))?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn write(
    out_dir: &Path,
    config: &RunConfig,
    outputs: &[&str],
    result: serde_json::Value,
) -> CliResult<()> {
    let manifest = Manifest {
        tool: "negfuse",
        version: env!("CARGO_PKG_VERSION"),
        core_version: negfuse_core::VERSION,
        command: &config.command,
        seed: config.seed,
        config_sha256: config_hash(config)?,
        config,
        outputs,
        result,
    };
    let mut text =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    io::write_text(&out_dir.join("manifest.json"), &text)
}
