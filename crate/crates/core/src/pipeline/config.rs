use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::DEFAULT_SPLIT_RATIO;
use crate::embedding::{CacheProvider, EmbeddingProvider, StubProvider, DEFAULT_DIM, DEFAULT_MAX_TOKENS};
use crate::error::{Error, Result};
use crate::eval::DEFAULT_TOLERANCES;
use crate::features::{Gazetteer, LabelMap, NerProvider};
use crate::model::{TrainConfig, DEFAULT_HIDDEN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusPaths {
    /// Pair dataset CSV.
    pub pairs: PathBuf,
    /// Article store directory (`<id>.json` files).
    pub store: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    pub seed: u64,
}

fn default_ratio() -> f64 {
    DEFAULT_SPLIT_RATIO
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_dim() -> usize {
    DEFAULT_DIM
}

impl Default for StubConfig {
    fn default() -> Self {
        Self { dim: DEFAULT_DIM, seed: 0 }
    }
}

/// Everything a pipeline run depends on. Relative paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusPaths,
    /// `"stub"` or `"cache:<path>"`.
    pub provider: String,
    #[serde(default)]
    pub stub: StubConfig,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,
    /// `"gazetteer"` (bundled tables) or `"gazetteer:<dir>"`.
    #[serde(default = "default_ner")]
    pub ner: String,
    #[serde(default)]
    pub labels: LabelMap,
    pub split: SplitConfig,
    pub train: TrainConfig,
    #[serde(default = "default_hidden")]
    pub hidden: [usize; 2],
    #[serde(default = "default_tolerances")]
    pub tolerances: Vec<f64>,
    #[serde(default = "default_true")]
    pub remove_stopwords: bool,
    pub output_dir: PathBuf,
}

fn default_max_tokens() -> usize {
    DEFAULT_MAX_TOKENS
}
fn default_ner() -> String {
    "gazetteer".into()
}
fn default_hidden() -> [usize; 2] {
    DEFAULT_HIDDEN
}
fn default_tolerances() -> Vec<f64> {
    DEFAULT_TOLERANCES.to_vec()
}
fn default_true() -> bool {
    true
}

impl RunConfig {
    /// Parses a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus.pairs);
        fix(&mut self.corpus.store);
        fix(&mut self.output_dir);
        for (prefix, selector) in [("cache:", &mut self.provider), ("gazetteer:", &mut self.ner)] {
            if let Some(p) = selector.strip_prefix(prefix) {
                let mut p = PathBuf::from(p);
                fix(&mut p);
                *selector = format!("{prefix}{}", p.display());
            }
        }
    }

    fn cache_path(&self) -> Option<PathBuf> {
        self.provider.strip_prefix("cache:").map(PathBuf::from)
    }

    fn gazetteer_dir(&self) -> Option<PathBuf> {
        self.ner.strip_prefix("gazetteer:").map(PathBuf::from)
    }

    /// Checks value ranges and that every input path exists.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.provider != "stub" && self.cache_path().is_none() {
            return bad(format!("provider must be \"stub\" or \"cache:<path>\", got {:?}", self.provider));
        }
        if self.ner != "gazetteer" && self.gazetteer_dir().is_none() {
            return bad(format!("ner must be \"gazetteer\" or \"gazetteer:<dir>\", got {:?}", self.ner));
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return bad(format!("split.ratio must be in (0, 1), got {}", self.split.ratio));
        }
        self.train.validate()?;
        if self.stub.dim == 0 || self.max_tokens == 0 || self.hidden.contains(&0) {
            return bad("stub.dim, max_tokens and hidden sizes must be positive".into());
        }
        if self.tolerances.is_empty() || self.tolerances.iter().any(|t| t.is_nan() || *t <= 0.0) {
            return bad("tolerances must be a non-empty list of positive numbers".into());
        }
        let must_exist = [Some(self.corpus.pairs.clone()), Some(self.corpus.store.clone()), self.cache_path(), self.gazetteer_dir()];
        for p in must_exist.into_iter().flatten() {
            if !p.exists() {
                return bad(format!("path does not exist: {}", p.display()));
            }
        }
        Ok(())
    }

    pub fn embedding_provider(&self) -> Result<Box<dyn EmbeddingProvider>> {
        match self.cache_path() {
            Some(path) => Ok(Box::new(CacheProvider::load(&path)?.with_max_tokens(self.max_tokens))),
            None => Ok(Box::new(StubProvider::new(self.stub.dim, self.stub.seed).with_max_tokens(self.max_tokens))),
        }
    }

    pub fn ner_provider(&self) -> Result<Box<dyn NerProvider>> {
        match self.gazetteer_dir() {
            Some(dir) => Ok(Box::new(Gazetteer::from_dir(&dir)?)),
            None => Ok(Box::new(Gazetteer::bundled())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "corpus": {"pairs": "pairs.csv", "store": "store"},
        "provider": "stub",
        "split": {"seed": 7},
        "train": {"learning_rate": 0.01, "momentum": 0.9, "epochs": 8, "seed": 7},
        "output_dir": "out"
    }"#;

    #[test]
    fn defaults_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, MINIMAL).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.corpus.pairs, dir.path().join("pairs.csv"));
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        assert_eq!(cfg.split.ratio, 0.67);
        assert_eq!(cfg.max_tokens, 256);
        assert_eq!(cfg.stub.dim, 384);
        assert_eq!(cfg.hidden, [120, 84]);
        assert_eq!(cfg.tolerances, vec![0.2, 0.33, 0.5]);
        assert!(cfg.train.shuffle);
        // inputs missing on disk
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        std::fs::write(dir.path().join("pairs.csv"), "").unwrap();
        std::fs::create_dir(dir.path().join("store")).unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn seeds_are_required() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, MINIMAL.replace(r#""split": {"seed": 7}"#, r#""split": {}"#)).unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Config(_))));
        std::fs::write(&path, MINIMAL.replace(r#", "seed": 7}"#, "}")).unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Config(_))));
    }

    #[test]
    fn provider_spec_paths_resolve() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, MINIMAL.replace(r#""provider": "stub""#, r#""provider": "cache:emb.tsv""#)).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.provider, format!("cache:{}", dir.path().join("emb.tsv").display()));
        let mut bad = cfg.clone();
        bad.provider = "bert".into();
        assert!(bad.validate().is_err());
    }
}
