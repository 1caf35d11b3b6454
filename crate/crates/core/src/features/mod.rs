//! Per-metric feature extraction over a pluggable named-entity recognizer.
//!
//! Geography, entities and time reduce an article to the entity mentions
//! relevant to that dimension; when nothing is found the whole article is
//! used instead. The remaining four dimensions always use the whole article.

mod cache;
mod gazetteer;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::ArticleRecord;
use crate::error::Result;
use crate::metric::MetricKind;

pub use cache::{feature_cache_key, FeatureCache};
pub use gazetteer::{Gazetteer, Lexicon, GAZETTEER_NAME};

/// A recognized mention. `start..end` are byte offsets into the text given
/// to the recognizer, and `text == source[start..end]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub text: String,
    pub label: String,
    pub start: usize,
    pub end: usize,
}

/// Named-entity recognizer.
///
/// `recognize` must be deterministic for a given instance and input.
/// Implementations are shared across threads.
pub trait NerProvider: Send + Sync {
    fn name(&self) -> &str;
    fn supported_languages(&self) -> &BTreeSet<String>;
    fn recognize(&self, text: &str, language: &str) -> Result<Vec<Entity>>;
}

/// Which recognizer labels count as locations and as temporal expressions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub location: BTreeSet<String>,
    pub time: BTreeSet<String>,
}

impl Default for LabelMap {
    fn default() -> Self {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self { location: set(&["LOCATION", "LOC", "GPE"]), time: set(&["DATE", "TIME"]) }
    }
}

impl LabelMap {
    fn selects(&self, metric: MetricKind, label: &str) -> bool {
        match metric {
            MetricKind::Geography => self.location.contains(label),
            MetricKind::Time => self.time.contains(label),
            MetricKind::Entities => true,
            _ => false,
        }
    }
}

/// Text spans representing one article for one metric. `spans` is never
/// empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub metric: MetricKind,
    pub spans: Vec<String>,
    pub fallback_used: bool,
}

/// Builds the feature bundle of `article` for `metric`.
///
/// Entity spans keep article order and repetitions.
pub fn extract_features(
    article: &ArticleRecord,
    metric: MetricKind,
    ner: &dyn NerProvider,
    labels: &LabelMap,
) -> Result<FeatureBundle> {
    let text = article.full_text();
    if !metric.is_entity_based() {
        return Ok(FeatureBundle { metric, spans: vec![text], fallback_used: false });
    }
    let spans: Vec<String> = ner
        .recognize(&text, &article.language)?
        .into_iter()
        .filter(|e| labels.selects(metric, &e.label))
        .map(|e| e.text)
        .collect();
    if spans.is_empty() {
        Ok(FeatureBundle { metric, spans: vec![text], fallback_used: true })
    } else {
        Ok(FeatureBundle { metric, spans, fallback_used: false })
    }
}

/// All seven bundles of one article, in [`MetricKind::ALL`] order. The
/// recognizer runs once and is shared by the entity-based metrics.
pub fn extract_all(article: &ArticleRecord, ner: &dyn NerProvider, labels: &LabelMap) -> Result<Vec<FeatureBundle>> {
    let text = article.full_text();
    let entities = ner.recognize(&text, &article.language)?;
    Ok(MetricKind::ALL
        .into_iter()
        .map(|metric| {
            if !metric.is_entity_based() {
                return FeatureBundle { metric, spans: vec![text.clone()], fallback_used: false };
            }
            let spans: Vec<String> = entities
                .iter()
                .filter(|e| labels.selects(metric, &e.label))
                .map(|e| e.text.clone())
                .collect();
            if spans.is_empty() {
                FeatureBundle { metric, spans: vec![text.clone()], fallback_used: true }
            } else {
                FeatureBundle { metric, spans, fallback_used: false }
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use chrono::Utc;
    use proptest::prelude::*;

    fn article(body: &str) -> ArticleRecord {
        ArticleRecord {
            id: "a".into(),
            url: String::new(),
            language: "en".into(),
            title: String::new(),
            headings: vec![],
            body: body.into(),
            fetched_at: Utc::now(),
        }
    }

    const FLOODS: &str = "Floods hit Paris and Berlin on Tuesday.";

    #[test]
    fn geography_and_time_examples() {
        let g = Gazetteer::bundled();
        let l = LabelMap::default();
        let geo = extract_features(&article(FLOODS), MetricKind::Geography, &g, &l).unwrap();
        assert_eq!(geo.spans, vec!["Paris", "Berlin"]);
        assert!(!geo.fallback_used);
        let time = extract_features(&article(FLOODS), MetricKind::Time, &g, &l).unwrap();
        assert_eq!(time.spans, vec!["Tuesday"]);
        assert!(!time.fallback_used);
    }

    #[test]
    fn no_location_falls_back_to_full_text() {
        let a = article("The committee met and argued about the budget for hours.");
        let b = extract_features(&a, MetricKind::Geography, &Gazetteer::bundled(), &LabelMap::default()).unwrap();
        assert_eq!(b.spans, vec![a.full_text()]);
        assert!(b.fallback_used);
    }

    #[test]
    fn full_text_metrics_ignore_entities() {
        let a = article(FLOODS);
        for m in [MetricKind::Narrative, MetricKind::Style, MetricKind::Tone, MetricKind::Overall] {
            let b = extract_features(&a, m, &Gazetteer::bundled(), &LabelMap::default()).unwrap();
            assert_eq!(b.spans, vec![FLOODS]);
            assert!(!b.fallback_used);
        }
    }

    #[test]
    fn repeated_mentions_are_kept() {
        let a = article("Paris wins. Paris celebrates. Rome waits. Paris sleeps.");
        let b = extract_features(&a, MetricKind::Geography, &Gazetteer::bundled(), &LabelMap::default()).unwrap();
        assert_eq!(b.spans, vec!["Paris", "Paris", "Rome", "Paris"]);
    }

    struct Failing;
    impl NerProvider for Failing {
        fn name(&self) -> &str {
            "failing"
        }
        fn supported_languages(&self) -> &BTreeSet<String> {
            unimplemented!()
        }
        fn recognize(&self, _: &str, _: &str) -> Result<Vec<Entity>> {
            Err(Error::Provider { provider: "failing".into(), message: "boom".into() })
        }
    }

    #[test]
    fn provider_failure_is_not_fallback() {
        let r = extract_features(&article(FLOODS), MetricKind::Geography, &Failing, &LabelMap::default());
        assert!(matches!(r, Err(Error::Provider { .. })));
        // full-text metrics never consult the provider
        assert!(extract_features(&article(FLOODS), MetricKind::Overall, &Failing, &LabelMap::default()).is_ok());
    }

    #[test]
    fn extract_all_matches_per_metric() {
        let g = Gazetteer::bundled();
        let l = LabelMap::default();
        let a = article("Angela Merkel visited Madrid in March 2020 with Siemens AG executives.");
        let all = extract_all(&a, &g, &l).unwrap();
        for (m, b) in MetricKind::ALL.into_iter().zip(&all) {
            assert_eq!(b, &extract_features(&a, m, &g, &l).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bundle_properties(words in proptest::collection::vec(
            "Paris|Berlin|Tuesday|March 2020|Angela Merkel|budget|[a-z]{1,8}|[A-Z][a-z]{1,6}", 1..25)) {
            let a = article(&words.join(" "));
            let g = Gazetteer::bundled();
            let l = LabelMap::default();
            let geo = extract_features(&a, MetricKind::Geography, &g, &l).unwrap();
            let ents = extract_features(&a, MetricKind::Entities, &g, &l).unwrap();
            for m in MetricKind::ALL {
                let b = extract_features(&a, m, &g, &l).unwrap();
                prop_assert!(!b.spans.is_empty());
                prop_assert_eq!(&b, &extract_features(&a, m, &g, &l).unwrap());
            }
            if !geo.fallback_used {
                for s in &geo.spans {
                    prop_assert!(ents.spans.contains(s));
                }
            }
        }
    }
}
