use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use erw_core::experiments::EnsembleConfig;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record accompanying every output directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub tool_version: String,
    /// Resolved ensemble configuration; feeding it back reproduces the outputs.
    pub config: EnsembleConfig,
    pub master_seed: u64,
    /// Where the seed came from: `flag`, `config`, `env` or `default`.
    pub seed_source: String,
    pub threads: Option<usize>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputDigest>,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn digest(dir: &Path, name: &str) -> std::io::Result<OutputDigest> {
    let data = fs::read(dir.join(name))?;
    Ok(OutputDigest {
        file: name.to_string(),
        bytes: data.len() as u64,
        sha256: hex::encode(Sha256::digest(&data)),
    })
}

pub fn tool_version() -> String {
    format!("erw {}", env!("CARGO_PKG_VERSION"))
}
