use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_json, write_json, Manifest, RunConfig, StageError, Workspace};
use crate::corpus::{load_pairs, retain_available, split_dataset, ArticleStore, DatasetSplit, PairRecord};
use crate::embedding::{
    baseline_score, concat, embed_bundle, mean_pool, span_key, truncate_tokens, EmbeddingProvider, EmbeddingVector,
};
use crate::error::{Error, Result};
use crate::eval::{build_report, Approach, EvalReport, ScoredSeries};
use crate::features::{extract_all, FeatureBundle, FeatureCache};
use crate::metric::MetricKind;
use crate::model::{Checkpoint, Example, MetricModelSet};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validate,
    Features,
    Embed,
    Train,
    Evaluate,
    Report,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Features => "features",
            Stage::Embed => "embed",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Runs `f` as `stage`, logging the outcome in the output directory's
/// manifest.
pub(crate) fn run_stage<T>(cfg: &RunConfig, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T, StageError> {
    let ws = Workspace::new(&cfg.output_dir);
    let out = f();
    let mut manifest = Manifest::load_or_default(&ws);
    manifest.record(stage, out.as_ref().map(|_| ()));
    if let Err(e) = manifest.save(&ws) {
        log::warn!("could not write manifest: {e}");
    }
    out.map_err(|source| StageError { stage, source })
}

/// Pairs whose two articles are in the store, in CSV order.
fn usable_pairs(cfg: &RunConfig) -> Result<(Vec<PairRecord>, ArticleStore)> {
    let store = ArticleStore::open(&cfg.corpus.store)?;
    let (pairs, mut report) = load_pairs(&cfg.corpus.pairs)?;
    let pairs = retain_available(pairs, &store, &mut report);
    if !report.skipped.is_empty() {
        log::info!("{} pair rows skipped while loading", report.skipped.len());
    }
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((pairs, store))
}

fn article_ids(pairs: &[PairRecord]) -> Vec<String> {
    let ids: BTreeSet<&String> = pairs.iter().flat_map(|p| [&p.article1_id, &p.article2_id]).collect();
    ids.into_iter().cloned().collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricFeatureStats {
    pub spans: usize,
    pub fallbacks: usize,
}

/// Per-run feature statistics, e.g. how often each metric fell back to the
/// whole article.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub ner: String,
    pub articles: usize,
    pub languages: BTreeMap<String, usize>,
    pub metrics: BTreeMap<MetricKind, MetricFeatureStats>,
}

/// Feature stage: extracts and caches the seven bundles of every article.
pub fn extract(cfg: &RunConfig) -> Result<FeatureSummary> {
    let ws = Workspace::new(&cfg.output_dir);
    let (pairs, store) = usable_pairs(cfg)?;
    let ner = cfg.ner_provider()?;
    let cache = FeatureCache::open(ws.features_dir())?;
    let ids = article_ids(&pairs);
    let results = par::try_map(&ids, |id| -> Result<(String, Vec<FeatureBundle>)> {
        let mut article = store.load(id)?;
        if cfg.remove_stopwords {
            article = article.without_stopwords();
        }
        let bundles = extract_all(&article, ner.as_ref(), &cfg.labels)?;
        for b in &bundles {
            cache.put(id, ner.name(), b)?;
        }
        Ok((article.language, bundles))
    })?;

    let mut summary = FeatureSummary { ner: ner.name().to_string(), articles: ids.len(), ..Default::default() };
    for (lang, bundles) in results {
        *summary.languages.entry(lang).or_default() += 1;
        for b in bundles {
            let s = summary.metrics.entry(b.metric).or_default();
            s.spans += b.spans.len();
            s.fallbacks += usize::from(b.fallback_used);
        }
    }
    write_json(&ws.feature_summary(), &summary)?;
    Ok(summary)
}

fn load_bundles(cache: &FeatureCache, ner_name: &str, id: &str) -> Result<Vec<FeatureBundle>> {
    MetricKind::ALL.into_iter().map(|m| cache.get(id, m, ner_name)).collect()
}

/// Pooled embedding of each bundle, in bundle order. Identical span lists
/// (the four full-text metrics) are embedded once.
pub(crate) fn pool_bundles(bundles: &[FeatureBundle], provider: &dyn EmbeddingProvider) -> Result<Vec<EmbeddingVector>> {
    let mut memo: HashMap<&[String], EmbeddingVector> = HashMap::new();
    let mut out = Vec::with_capacity(bundles.len());
    for b in bundles {
        let v = match memo.get(b.spans.as_slice()) {
            Some(v) => v.clone(),
            None => {
                let v = mean_pool(&embed_bundle(b, provider)?);
                memo.insert(&b.spans, v.clone());
                v
            }
        };
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PooledFile {
    provider: String,
    dim: usize,
    vectors: BTreeMap<String, EmbeddingVector>,
}

/// Embedding stage: pooled vector per (article, metric), written to
/// `embeddings/<metric>.json`.
pub fn embed(cfg: &RunConfig) -> Result<()> {
    let ws = Workspace::new(&cfg.output_dir);
    let (pairs, _) = usable_pairs(cfg)?;
    let provider = cfg.embedding_provider()?;
    let ner_name = cfg.ner_provider()?.name().to_string();
    let cache = FeatureCache::open(ws.features_dir())?;
    let ids = article_ids(&pairs);
    let pooled = par::try_map(&ids, |id| pool_bundles(&load_bundles(&cache, &ner_name, id)?, provider.as_ref()))?;
    for (k, metric) in MetricKind::ALL.into_iter().enumerate() {
        let file = PooledFile {
            provider: provider.name().to_string(),
            dim: provider.dim(),
            vectors: ids.iter().cloned().zip(pooled.iter().map(|p| p[k].clone())).collect(),
        };
        write_json(&ws.embeddings_dir().join(format!("{metric}.json")), &file)?;
    }
    Ok(())
}

/// One line of the exporter's request file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportRequest {
    pub key: String,
    pub text: String,
}

/// Writes every distinct post-truncation span as JSON lines sorted by key,
/// for an external model to embed. Returns the number of requests.
pub fn export_requests(cfg: &RunConfig, path: &Path) -> Result<usize> {
    let ws = Workspace::new(&cfg.output_dir);
    let (pairs, _) = usable_pairs(cfg)?;
    let ner_name = cfg.ner_provider()?.name().to_string();
    let cache = FeatureCache::open(ws.features_dir())?;
    let mut requests = BTreeMap::new();
    for id in article_ids(&pairs) {
        for b in load_bundles(&cache, &ner_name, &id)? {
            for span in &b.spans {
                let text = truncate_tokens(span, cfg.max_tokens);
                requests.entry(span_key(&text)).or_insert(text);
            }
        }
    }
    let mut out = Vec::new();
    for (key, text) in &requests {
        serde_json::to_writer(&mut out, &ExportRequest { key: key.clone(), text: text.clone() })?;
        out.push(b'\n');
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))?;
    Ok(requests.len())
}

fn load_pooled(ws: &Workspace) -> Result<BTreeMap<MetricKind, PooledFile>> {
    MetricKind::ALL
        .into_iter()
        .map(|m| {
            let f: PooledFile = read_json(&ws.embeddings_dir().join(format!("{m}.json")), "pooled embeddings")?;
            Ok((m, f))
        })
        .collect()
}

fn pair_input(pooled: &PooledFile, pair: &PairRecord) -> Result<(EmbeddingVector, EmbeddingVector)> {
    let get = |id: &str| {
        pooled.vectors.get(id).cloned().ok_or_else(|| Error::NotFound(format!("pooled embedding of article {id}")))
    };
    Ok((get(&pair.article1_id)?, get(&pair.article2_id)?))
}

/// Training stage: splits the pairs, trains the seven heads on the train
/// side and writes `split.json` and `checkpoints/<metric>.json`.
pub fn train(cfg: &RunConfig) -> Result<BTreeMap<MetricKind, Vec<f64>>> {
    let ws = Workspace::new(&cfg.output_dir);
    let (pairs, _) = usable_pairs(cfg)?;
    let split = split_dataset(&pairs, cfg.split.ratio, cfg.split.seed)?;
    write_json(&ws.split(), &split)?;
    let pooled = load_pooled(&ws)?;
    let by_id: HashMap<&str, &PairRecord> = pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();

    let mut data: BTreeMap<MetricKind, Vec<Example>> = BTreeMap::new();
    for id in &split.train {
        let pair = by_id[id.as_str()];
        let targets = pair.normalized()?;
        for m in MetricKind::ALL {
            let (a, b) = pair_input(&pooled[&m], pair)?;
            data.entry(m).or_default().push(Example { input: concat(&a, &b)?.into_inner(), target: targets.scores[&m] });
        }
    }
    let dim = pooled[&MetricKind::Overall].dim;
    let mut models = MetricModelSet::init(2 * dim, cfg.hidden, cfg.train.seed);
    let history = models.train_all(&data, &cfg.train)?;
    std::fs::create_dir_all(ws.checkpoints_dir()).map_err(|e| Error::io(ws.checkpoints_dir(), e))?;
    for head in models.heads() {
        let ck = Checkpoint::new(head, cfg.train.clone(), history[&head.metric].clone());
        ck.save(&ws.checkpoints_dir().join(format!("{}.json", head.metric)))?;
    }
    Ok(history)
}

pub fn load_checkpoints(dir: &Path) -> Result<MetricModelSet> {
    let heads = MetricKind::ALL
        .into_iter()
        .map(|m| Checkpoint::load(&dir.join(format!("{m}.json")))?.head())
        .collect::<Result<Vec<_>>>()?;
    MetricModelSet::from_heads(heads)
}

/// Evaluation stage: scores the test split with the cosine baseline and the
/// trained heads, writing `report.json` and `report.txt`.
pub fn evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    let ws = Workspace::new(&cfg.output_dir);
    let (pairs, _) = usable_pairs(cfg)?;
    let split: DatasetSplit = read_json(&ws.split(), "dataset split")?;
    let models = load_checkpoints(&ws.checkpoints_dir())?;
    let pooled = load_pooled(&ws)?;
    let by_id: HashMap<&str, &PairRecord> = pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let test: Vec<&PairRecord> = split
        .test
        .iter()
        .map(|id| by_id.get(id.as_str()).copied().ok_or_else(|| Error::NotFound(format!("test pair {id}"))))
        .collect::<Result<_>>()?;

    let per_metric = par::try_map(&MetricKind::ALL, |&m| -> Result<Vec<ScoredSeries>> {
        let head = models.head(m);
        let (mut base, mut ffn, mut targets) = (Vec::new(), Vec::new(), Vec::new());
        for pair in &test {
            let (a, b) = pair_input(&pooled[&m], pair)?;
            base.push(baseline_score(&a, &b)?);
            ffn.push(head.forward(concat(&a, &b)?.as_slice())?);
            targets.push(pair.normalized()?.scores[&m]);
        }
        Ok(vec![
            ScoredSeries { metric: m, approach: Approach::BaselineCosine, preds: base, targets: targets.clone() },
            ScoredSeries { metric: m, approach: Approach::Ffn, preds: ffn, targets },
        ])
    })?;
    let series: Vec<ScoredSeries> = per_metric.into_iter().flatten().collect();
    let report = build_report(&series, &cfg.tolerances)?;
    std::fs::write(ws.report_json(), report.to_json()?).map_err(|e| Error::io(ws.report_json(), e))?;
    std::fs::write(ws.report_txt(), report.render_table()).map_err(|e| Error::io(ws.report_txt(), e))?;
    Ok(report)
}

/// Renders the saved report as a table.
pub fn render_report(cfg: &RunConfig) -> Result<String> {
    let ws = Workspace::new(&cfg.output_dir);
    let text = std::fs::read_to_string(ws.report_json())
        .map_err(|_| Error::NotFound(format!("report {}; run evaluate first", ws.report_json().display())))?;
    Ok(EvalReport::from_json(&text)?.render_table())
}

/// Runs validate, features, embed, train and evaluate in order, stopping at
/// the first failure. Artifacts of completed stages are kept and the
/// manifest names the failed stage.
pub fn run_pipeline(cfg: &RunConfig) -> Result<EvalReport, StageError> {
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| StageError { stage: Stage::Validate, source: Error::io(&cfg.output_dir, e) })?;
    run_stage(cfg, Stage::Validate, || cfg.validate())?;
    run_stage(cfg, Stage::Features, || extract(cfg))?;
    run_stage(cfg, Stage::Embed, || embed(cfg))?;
    run_stage(cfg, Stage::Train, || train(cfg))?;
    run_stage(cfg, Stage::Evaluate, || evaluate(cfg))
}
