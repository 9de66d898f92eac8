use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub determinism: &'static str,
    pub tool_version: &'static str,
    pub precision_bits: usize,
    pub threads: usize,
    pub outputs: Vec<OutputDigest>,
}

pub const DETERMINISM_NOTE: &str =
    "outputs depend only on the parameters; thread count and run order do not change any byte";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> CliResult<OutputDigest> {
    let bytes = std::fs::read(path)?;
    Ok(OutputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}
