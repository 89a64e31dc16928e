//! Output bookkeeping: every file a command writes is registered here so the
//! manifest can list its checksum and so that a failed run can delete what
//! it already produced.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use w2d_core::{gf1, GridFunction};

#[derive(Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, F: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    flags: &'a F,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
}

pub struct Run {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

impl Run {
    pub fn new() -> Self {
        Run {
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn read_field(&mut self, path: &Path) -> Result<GridFunction> {
        let u = gf1::read(path).with_context(|| format!("reading field {}", path.display()))?;
        self.inputs.push(path.to_path_buf());
        Ok(u)
    }

    /// Registers `path` as an output. Refuses to overwrite an input.
    fn claim(&mut self, path: &Path) -> Result<()> {
        if let Some(i) = self.inputs.iter().find(|i| same_file(i, path)) {
            bail!(
                "output {} would overwrite input {}",
                path.display(),
                i.display()
            );
        }
        if self.outputs.iter().any(|o| o == path) {
            bail!("output {} given twice", path.display());
        }
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn write_text(&mut self, path: &Path, text: &str) -> Result<()> {
        self.claim(path)?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn write_field(&mut self, path: &Path, u: &GridFunction) -> Result<()> {
        self.write_text(path, &gf1::to_string(u))
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(path, &text)
    }

    /// Writes the manifest next to the first output, or at `explicit`.
    pub fn finish<F: Serialize>(
        &mut self,
        command: &str,
        flags: &F,
        explicit: Option<&Path>,
    ) -> Result<()> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let first = self.outputs.first().context("command produced no output")?;
                let mut name = first.as_os_str().to_owned();
                name.push(".manifest.json");
                PathBuf::from(name)
            }
        };
        let entries = |paths: &[PathBuf]| -> Result<Vec<FileEntry>> {
            paths
                .iter()
                .map(|p| {
                    Ok(FileEntry {
                        path: p.to_string_lossy().into_owned(),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect()
        };
        let manifest = Manifest {
            tool: "w2d",
            version: env!("CARGO_PKG_VERSION"),
            command,
            flags,
            inputs: entries(&self.inputs)?,
            outputs: entries(&self.outputs)?,
        };
        self.write_json(&path, &manifest)
    }

    /// Removes every output registered so far.
    pub fn cleanup(&self) {
        for p in &self.outputs {
            let _ = fs::remove_file(p);
        }
    }
}
