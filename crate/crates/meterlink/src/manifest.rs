//! Run manifests written next to every output file.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Every resolved option, defaults included.
    pub parameters: BTreeMap<String, Value>,
    /// Command line after the program name; `replay` parses it again.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        parameters: BTreeMap<String, Value>,
        args: Vec<String>,
        seed: Option<u64>,
    ) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            args,
            seed,
            tool_version: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let file = std::fs::File::create(path)?;
        crate::output::write_json(io::BufWriter::new(file), self)
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(io::Error::from)
    }
}

/// `<output>.manifest.json`
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
