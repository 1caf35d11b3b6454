use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{load_checkpoints, pool_bundles, RunConfig, Workspace};
use crate::corpus::{denormalize_score, ArticleRecord};
use crate::embedding::{baseline_score, concat, cosine_similarity};
use crate::error::Result;
use crate::features::extract_all;
use crate::metric::MetricKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPrediction {
    /// Trained head output in [0, 1].
    pub score: f64,
    /// `score` mapped back to the annotators' 1..4 scale.
    pub raw_score: f64,
    pub baseline: f64,
    pub cosine: f64,
    /// Whether each article fell back to its full text for this metric.
    pub fallback_used: [bool; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub article1: String,
    pub article2: String,
    pub metrics: BTreeMap<MetricKind, MetricPrediction>,
}

/// Scores one article pair with the checkpoints in the output directory.
pub fn predict(cfg: &RunConfig, a1: &ArticleRecord, a2: &ArticleRecord) -> Result<Prediction> {
    let ws = Workspace::new(&cfg.output_dir);
    let models = load_checkpoints(&ws.checkpoints_dir())?;
    let ner = cfg.ner_provider()?;
    let provider = cfg.embedding_provider()?;
    let prep = |a: &ArticleRecord| if cfg.remove_stopwords { a.without_stopwords() } else { a.clone() };
    let b1 = extract_all(&prep(a1), ner.as_ref(), &cfg.labels)?;
    let b2 = extract_all(&prep(a2), ner.as_ref(), &cfg.labels)?;
    let p1 = pool_bundles(&b1, provider.as_ref())?;
    let p2 = pool_bundles(&b2, provider.as_ref())?;

    let mut metrics = BTreeMap::new();
    for (k, m) in MetricKind::ALL.into_iter().enumerate() {
        let score = models.head(m).forward(concat(&p1[k], &p2[k])?.as_slice())?;
        metrics.insert(
            m,
            MetricPrediction {
                score,
                raw_score: denormalize_score(score),
                baseline: baseline_score(&p1[k], &p2[k])?,
                cosine: cosine_similarity(&p1[k], &p2[k])?,
                fallback_used: [b1[k].fallback_used, b2[k].fallback_used],
            },
        );
    }
    Ok(Prediction { article1: a1.id.clone(), article2: a2.id.clone(), metrics })
}
