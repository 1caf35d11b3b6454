use std::path::PathBuf;

use sha2::{Digest, Sha256};

use super::FeatureBundle;
use crate::error::{Error, Result};
use crate::metric::MetricKind;

/// Stable file key for the bundle of (`article_id`, `metric`, `provider`).
pub fn feature_cache_key(article_id: &str, metric: MetricKind, provider: &str) -> String {
    let mut h = Sha256::new();
    for part in [article_id, metric.as_str(), provider] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Directory of `<key>.json` feature bundles.
#[derive(Debug, Clone)]
pub struct FeatureCache {
    dir: PathBuf,
}

impl FeatureCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    fn path(&self, article_id: &str, metric: MetricKind, provider: &str) -> PathBuf {
        self.dir.join(format!("{}.json", feature_cache_key(article_id, metric, provider)))
    }

    pub fn put(&self, article_id: &str, provider: &str, bundle: &FeatureBundle) -> Result<()> {
        let path = self.path(article_id, bundle.metric, provider);
        std::fs::write(&path, serde_json::to_string(bundle)?).map_err(|e| Error::io(&path, e))
    }

    pub fn get(&self, article_id: &str, metric: MetricKind, provider: &str) -> Result<FeatureBundle> {
        let path = self.path(article_id, metric, provider);
        match std::fs::read_to_string(&path) {
            Ok(s) => Ok(serde_json::from_str(&s)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(Error::NotFound(format!("{metric} features of article {article_id} ({provider})")))
            }
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}
