//! Provenance stamps embedded in every output artifact.

use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = concat!("litmap ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub seed: u64,
    /// `(file name, sha256 hex)` pairs in the order the inputs were given.
    pub inputs: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(seed: u64) -> Self {
        Provenance {
            tool: TOOL_VERSION.to_string(),
            seed,
            inputs: Vec::new(),
        }
    }

    pub fn with_input(mut self, path: &Path) -> Result<Self> {
        let digest = file_digest(path)?;
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.inputs.push((name, digest));
        Ok(self)
    }

    /// Single-line form used as the leading `#` comment of CSV artifacts.
    pub fn comment_line(&self) -> String {
        let mut s = format!("# {} seed={}", self.tool, self.seed);
        for (name, digest) in &self.inputs {
            s.push_str(&format!(" {}={}", name, &digest[..16]));
        }
        s.push('\n');
        s
    }
}

pub fn file_digest(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex(&h.finalize()))
}

pub fn bytes_digest(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `contents` to `path`, mapping failures to [`Error::Io`].
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn create_file(path: &Path) -> Result<io::BufWriter<File>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(io::BufWriter::with_capacity(1 << 20, f))
}
