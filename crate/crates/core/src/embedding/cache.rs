//! Embedding-cache text file.
//!
//! ```text
//! dim=<d> provider=<name>
//! <sha256-key>\t<d space-separated decimals>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{span_key, EmbeddingProvider, EmbeddingVector, DEFAULT_MAX_TOKENS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheHeader {
    pub dim: usize,
    pub provider: String,
}

impl CacheHeader {
    fn parse(line: &str) -> Result<Self> {
        let bad = || Error::Format(format!("bad embedding-cache header {line:?}"));
        let rest = line.trim_end().strip_prefix("dim=").ok_or_else(bad)?;
        let (dim, rest) = rest.split_once(' ').ok_or_else(bad)?;
        let provider = rest.trim_start().strip_prefix("provider=").ok_or_else(bad)?;
        let dim: usize = dim.parse().map_err(|_| bad())?;
        if dim == 0 || provider.is_empty() {
            return Err(bad());
        }
        Ok(Self { dim, provider: provider.to_string() })
    }
}

/// Writes `entries` sorted by key, nine significant digits per value.
pub fn write_cache(path: &Path, provider: &str, dim: usize, entries: &BTreeMap<String, EmbeddingVector>) -> Result<()> {
    let mut out = format!("dim={dim} provider={provider}\n");
    for (key, v) in entries {
        if v.dim() != dim {
            return Err(Error::Dimension { expected: dim, actual: v.dim() });
        }
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Format(format!("invalid cache key {key:?}")));
        }
        out.push_str(key);
        out.push('\t');
        for (i, x) in v.as_slice().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x:.8e}");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_cache(path: &Path) -> Result<(CacheHeader, BTreeMap<String, EmbeddingVector>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty embedding cache", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let header = CacheHeader::parse(&first)?;
    let mut entries = BTreeMap::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), n + 2);
        let (key, values) = line
            .split_once('\t')
            .ok_or_else(|| Error::Format(format!("{}: expected <key><TAB><values>", at())))?;
        let values = values
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("{}: {e}", at())))?;
        if values.len() != header.dim {
            return Err(Error::Format(format!(
                "{}: row has {} values but header says dim={}",
                at(),
                values.len(),
                header.dim
            )));
        }
        let v = EmbeddingVector::new(values).map_err(|e| Error::Format(format!("{}: {e}", at())))?;
        if entries.insert(key.to_string(), v).is_some() {
            return Err(Error::Format(format!("{}: duplicate key {key}", at())));
        }
    }
    Ok((header, entries))
}

/// Serves embeddings precomputed by an external model. Lookups are by
/// [`span_key`] of the post-truncation text; misses are errors.
#[derive(Debug, Clone)]
pub struct CacheProvider {
    name: String,
    dim: usize,
    max_tokens: usize,
    entries: BTreeMap<String, EmbeddingVector>,
    languages: BTreeSet<String>,
}

impl CacheProvider {
    pub fn load(path: &Path) -> Result<Self> {
        let (header, entries) = read_cache(path)?;
        Ok(Self {
            name: format!("cache:{}", header.provider),
            dim: header.dim,
            max_tokens: DEFAULT_MAX_TOKENS,
            entries,
            languages: BTreeSet::new(),
        })
    }

    pub fn with_max_tokens(mut self, max_tokens: usize) -> Self {
        self.max_tokens = max_tokens.max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl EmbeddingProvider for CacheProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    fn supported_languages(&self) -> &BTreeSet<String> {
        &self.languages
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let key = span_key(text);
        self.entries.get(&key).cloned().ok_or(Error::MissingEmbedding { key })
    }
}
