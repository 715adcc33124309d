//! Output directory handling and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
struct Input {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, P: Serialize> {
    command: &'a str,
    versions: Versions,
    inputs: &'a [Input],
    parameters: &'a P,
    artifacts: &'a [String],
}

#[derive(Debug, Serialize)]
struct Versions {
    #[serde(rename = "kdv-star")]
    core: &'static str,
    #[serde(rename = "kdv-star-cli")]
    cli: &'static str,
}

/// Collects artifacts written under one output directory.
pub struct OutDir {
    root: PathBuf,
    command: &'static str,
    inputs: Vec<Input>,
    artifacts: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path, command: &'static str) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Write {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            command,
            inputs: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    /// Records an input file by content hash.
    pub fn input(&mut self, path: &Path, contents: &str) {
        self.inputs.push(Input {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(contents.as_bytes())),
            bytes: contents.len(),
        });
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|source| CliError::Write {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, contents).map_err(|source| CliError::Write { path, source })?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("outputs always serialize");
        text.push('\n');
        self.write(name, text)
    }

    /// Writes `manifest.json` listing everything recorded so far.
    pub fn finish<P: Serialize>(self, parameters: &P) -> Result<(), CliError> {
        let manifest = Manifest {
            command: self.command,
            versions: Versions {
                core: kdv_star::VERSION,
                cli: env!("CARGO_PKG_VERSION"),
            },
            inputs: &self.inputs,
            parameters,
            artifacts: &self.artifacts,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest always serializes");
        text.push('\n');
        let path = self.root.join("manifest.json");
        fs::write(&path, text).map_err(|source| CliError::Write { path, source })
    }
}

/// Table text from [`kdv_star::io::write_table`].
pub fn table<R: AsRef<[f64]>>(
    comments: &[String],
    columns: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> Vec<u8> {
    let mut buf = Vec::new();
    kdv_star::io::write_table(&mut buf, comments, columns, rows)
        .expect("writing to memory cannot fail");
    buf
}
