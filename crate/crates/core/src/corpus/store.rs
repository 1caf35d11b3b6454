use std::path::{Path, PathBuf};

use super::ArticleRecord;
use crate::error::{Error, Result};

/// Directory of `<id>.json` article files.
#[derive(Debug, Clone)]
pub struct ArticleStore {
    root: PathBuf,
}

impl ArticleStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path_for(&self, id: &str) -> Result<PathBuf> {
        if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
            return Err(Error::Argument(format!("article id {id:?} is not a valid file name")));
        }
        Ok(self.root.join(format!("{id}.json")))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.path_for(id).map(|p| p.is_file()).unwrap_or(false)
    }

    /// Writes the record, replacing any earlier version.
    pub fn store(&self, record: &ArticleRecord) -> Result<PathBuf> {
        let path = self.path_for(&record.id)?;
        let json = serde_json::to_string_pretty(record)?;
        // Write-then-rename so a concurrent reader never sees a partial file.
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, json).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(&self, id: &str) -> Result<ArticleRecord> {
        let path = self.path_for(id)?;
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::NotFound(format!("article {id} in {}", self.root.display())))
            }
            Err(e) => return Err(Error::io(&path, e)),
        };
        Ok(serde_json::from_str(&text)?)
    }

    /// Sorted ids of every stored article.
    pub fn ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&self.root).map_err(|e| Error::io(&self.root, e))? {
            let entry = entry.map_err(|e| Error::io(&self.root, e))?;
            let name = entry.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".json")) {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }
}
