//! Article ingestion, cleaning, persistence and dataset handling.

mod fetch;
mod html;
mod pairs;
mod split;
pub mod stopwords;
mod store;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricKind;

pub use fetch::{fetch_article, Fetcher, Politeness};
pub use html::{extract_article, ExtractConfig, DEFAULT_JUNK_MARKERS};
pub use pairs::{load_pairs, load_pairs_from_reader, retain_available, LoadReport, SkippedRow};
pub use split::{split_dataset, DatasetSplit, DEFAULT_SPLIT_RATIO};
pub use stopwords::remove_stopwords;
pub use store::ArticleStore;

/// Lowest (most similar) raw rating.
pub const RAW_MIN: f64 = 1.0;
/// Highest (most dissimilar) raw rating.
pub const RAW_MAX: f64 = 4.0;

/// One cleaned news article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub id: String,
    pub url: String,
    pub language: String,
    pub title: String,
    pub headings: Vec<String>,
    pub body: String,
    pub fetched_at: DateTime<Utc>,
}

impl ArticleRecord {
    /// Title and body joined by a newline, or the body alone when there is
    /// no title. This is the span used by the full-text metrics.
    pub fn full_text(&self) -> String {
        if self.title.trim().is_empty() {
            self.body.clone()
        } else {
            format!("{}\n{}", self.title, self.body)
        }
    }

    /// Copy with stopwords removed from title and body. A body that would
    /// become empty is kept as is.
    pub fn without_stopwords(&self) -> ArticleRecord {
        let mut out = self.clone();
        out.title = remove_stopwords(&self.title, &self.language);
        let body = remove_stopwords(&self.body, &self.language);
        if !body.is_empty() {
            out.body = body;
        }
        out
    }
}

/// An article pair with its seven raw ratings on the 1..=4 scale
/// (1 = most similar).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub pair_id: String,
    pub article1_id: String,
    pub article2_id: String,
    pub url1: String,
    pub url2: String,
    pub lang1: String,
    pub lang2: String,
    pub lang_pair: String,
    pub raw_scores: BTreeMap<MetricKind, f64>,
}

impl PairRecord {
    pub fn normalized(&self) -> Result<NormalizedPair> {
        let mut scores = BTreeMap::new();
        for m in MetricKind::ALL {
            let raw = *self
                .raw_scores
                .get(&m)
                .ok_or_else(|| Error::Format(format!("pair {} lacks a {m} score", self.pair_id)))?;
            scores.insert(m, normalize_score(raw)?);
        }
        Ok(NormalizedPair { pair_id: self.pair_id.clone(), scores })
    }
}

/// Pair scores mapped to 0..=1 similarity (1 = most similar).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPair {
    pub pair_id: String,
    pub scores: BTreeMap<MetricKind, f64>,
}

/// Maps a raw rating in [1, 4] to a similarity in [0, 1]: `(4 - raw) / 3`.
pub fn normalize_score(raw: f64) -> Result<f64> {
    if !(RAW_MIN..=RAW_MAX).contains(&raw) {
        return Err(Error::Range { value: raw, range: "[1, 4]" });
    }
    Ok((RAW_MAX - raw) / (RAW_MAX - RAW_MIN))
}

/// Inverse of [`normalize_score`].
pub fn denormalize_score(score: f64) -> f64 {
    RAW_MAX - (RAW_MAX - RAW_MIN) * score
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_score(4.0).unwrap(), 0.0);
        assert_eq!(normalize_score(1.0).unwrap(), 1.0);
        assert_eq!(normalize_score(2.5).unwrap(), 0.5);
    }

    #[test]
    fn normalize_rejects_out_of_range() {
        assert!(matches!(normalize_score(0.99), Err(Error::Range { .. })));
        assert!(matches!(normalize_score(4.01), Err(Error::Range { .. })));
        assert!(normalize_score(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_affine_and_decreasing(a in 1.0f64..=4.0, b in 1.0f64..=4.0) {
            let (na, nb) = (normalize_score(a).unwrap(), normalize_score(b).unwrap());
            prop_assert!((na - nb - (b - a) / 3.0).abs() < 1e-12);
            if a < b { prop_assert!(na > nb); }
            prop_assert!((0.0..=1.0).contains(&na));
        }

        #[test]
        fn normalize_inverts(raw in 1.0f64..=4.0) {
            let back = denormalize_score(normalize_score(raw).unwrap());
            prop_assert!((back - raw).abs() < 1e-12);
        }
    }

    #[test]
    fn full_text_joins_title_and_body() {
        let mut a = ArticleRecord {
            id: "1".into(),
            url: String::new(),
            language: "en".into(),
            title: "Title".into(),
            headings: vec![],
            body: "Body.".into(),
            fetched_at: Utc::now(),
        };
        assert_eq!(a.full_text(), "Title\nBody.");
        a.title.clear();
        assert_eq!(a.full_text(), "Body.");
    }
}
