//! Atomic result files and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const TOOL: &str = "fockfade";

/// Everything needed to describe, and re-run, one invocation.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub out: String,
    pub config: Map<String, Value>,
    pub sources: Map<String, Value>,
    pub config_file: Option<String>,
    pub outputs: Vec<String>,
    pub threads: usize,
    pub wall_clock_s: f64,
    pub details: Value,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `<stem><suffix>`, with a trailing `.csv`/`.json` removed from `stem`.
pub fn with_suffix(stem: &str, suffix: &str) -> PathBuf {
    let base = stem.strip_suffix(".csv").or_else(|| stem.strip_suffix(".json")).unwrap_or(stem);
    PathBuf::from(format!("{base}{suffix}"))
}

pub fn pretty(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    s.push(b'\n');
    s
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a manifest: {e}", path.display())))?;
    if m.tool != TOOL {
        return Err(CliError::Usage(format!("{}: manifest was written by '{}'", path.display(), m.tool)));
    }
    Ok(m)
}
