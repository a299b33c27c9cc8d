//! All-or-nothing file output: everything is rendered in memory first, then
//! written to temporaries next to the targets and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    /// Renders with `f` into a buffer and stages the result.
    pub fn render<E>(
        &mut self,
        path: impl Into<PathBuf>,
        f: impl FnOnce(&mut Vec<u8>) -> Result<(), E>,
    ) -> Result<()>
    where
        E: std::error::Error + Send + Sync + 'static,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.add(path, buf);
        Ok(())
    }

    pub fn json<T: serde::Serialize>(&mut self, path: impl Into<PathBuf>, value: &T) -> Result<()> {
        let mut buf = serde_json::to_vec_pretty(value)?;
        buf.push(b'\n');
        self.add(path, buf);
        Ok(())
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    /// Writes every file. Nothing is renamed until all temporaries are
    /// complete, so a failure leaves no new or truncated outputs.
    pub fn commit(self) -> Result<()> {
        let mut pending = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut tmp = NamedTempFile::new_in(dir)
                .with_context(|| format!("temp file in {}", dir.display()))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            pending.push((tmp, path));
        }
        for (tmp, path) in pending {
            tmp.persist(path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}
