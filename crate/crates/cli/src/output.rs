//! Deterministic artifact assembly and atomic writes.
//!
//! Artifacts are fully built in memory and written through a temp-file
//! rename, so an error anywhere in a run leaves no partial files. Floats
//! print via Rust's shortest round-trip formatting (`-inf` for negative
//! infinity), which is platform-stable and re-parses to the same bits.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliResult;

/// One output file: a name relative to the output directory plus its bytes.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Artifact {
            name: name.into(),
            bytes,
        }
    }
}

/// Shortest round-trip decimal for a double; negative infinity prints as
/// `-inf` (the spelling consumers of the CSV contract expect).
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

/// Builds a CSV from a provenance comment, a header, and rows of
/// pre-formatted cells.
pub struct CsvBuilder {
    text: String,
}

impl CsvBuilder {
    pub fn new(provenance: &str, header: &[&str]) -> Self {
        let mut text = String::new();
        text.push_str(provenance);
        text.push('\n');
        text.push_str(&header.join(","));
        text.push('\n');
        CsvBuilder { text }
    }

    pub fn push_row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Writes every artifact under `out_dir` atomically; returns the paths.
pub fn write_artifacts(out_dir: &Path, artifacts: &[Artifact]) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(artifacts.len());
    for artifact in artifacts {
        let path = out_dir.join(&artifact.name);
        let tmp = out_dir.join(format!("{}.tmp", artifact.name));
        fs::write(&tmp, &artifact.bytes)?;
        fs::rename(&tmp, &path)?;
        written.push(path);
    }
    Ok(written)
}
