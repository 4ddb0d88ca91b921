//! Run directory with a manifest of artifact hashes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.txt";

pub struct RunDir {
    root: PathBuf,
    entries: BTreeMap<String, String>,
}

impl RunDir {
    /// Opens `root`, creating it, and loads an existing manifest.
    pub fn open(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        let mut entries = BTreeMap::new();
        if let Ok(text) = fs::read_to_string(root.join(MANIFEST)) {
            for line in text.lines() {
                if let Some((hash, name)) = line.split_once("  ") {
                    entries.insert(name.to_string(), hash.to_string());
                }
            }
        }
        Ok(Self {
            root: root.to_path_buf(),
            entries,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes an artifact and records its hash.
    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, contents.as_ref()).with_context(|| format!("writing {}", path.display()))?;
        self.entries
            .insert(name.to_string(), hex::encode(Sha256::digest(contents.as_ref())));
        self.save()?;
        Ok(path)
    }

    pub fn read(&self, name: &str) -> Result<String> {
        let path = self.path(name);
        fs::read_to_string(&path).with_context(|| format!("reading {} (run the earlier stage first)", path.display()))
    }

    /// Drops manifest entries under a directory prefix, deleting the files.
    pub fn clear(&mut self, prefix: &str) -> Result<()> {
        let stale: Vec<String> = self.entries.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        for name in stale {
            let _ = fs::remove_file(self.path(&name));
            self.entries.remove(&name);
        }
        self.save()
    }

    fn save(&self) -> Result<()> {
        let text: String = self.entries.iter().map(|(n, h)| format!("{h}  {n}\n")).collect();
        fs::write(self.root.join(MANIFEST), text)?;
        Ok(())
    }
}
