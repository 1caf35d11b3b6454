use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::write_json;
use crate::corpus::{extract_article, load_pairs, ArticleRecord, ArticleStore, ExtractConfig, Fetcher, LoadReport, Politeness};
use crate::error::{Error, Result};
use crate::par;

pub const ARTICLES_DIR: &str = "articles";
pub const INGEST_REPORT: &str = "ingest_report.json";

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub politeness: Politeness,
    /// Upper bound on simultaneous downloads.
    pub concurrency: usize,
    pub extract: ExtractConfig,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { politeness: Politeness::default(), concurrency: 4, extract: ExtractConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestFailure {
    pub pair_id: String,
    pub article_id: String,
    pub url: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub load: LoadReport,
    pub pairs_ingested: usize,
    /// Articles written during this run.
    pub articles_stored: usize,
    /// Articles already present in the store and left untouched.
    pub articles_reused: usize,
    pub failures: Vec<IngestFailure>,
}

enum Source {
    Remote(String),
    Local(PathBuf),
}

/// `http(s)://` urls are downloaded; `file://` urls and bare paths
/// (relative to the CSV's directory) are read from disk.
fn resolve(url: &str, base: &Path) -> Source {
    if url.starts_with("http://") || url.starts_with("https://") {
        Source::Remote(url.to_string())
    } else {
        let p = PathBuf::from(url.strip_prefix("file://").unwrap_or(url));
        Source::Local(if p.is_relative() { base.join(p) } else { p })
    }
}

enum Outcome {
    Reused,
    Fetched(Box<ArticleRecord>),
}

/// Downloads, cleans and stores the articles of every pair in `pairs_csv`
/// under `<out_dir>/articles`.
///
/// A pair is ingested only when both of its articles are available; other
/// pairs are listed as failures and the run continues. Articles already in
/// the store are not fetched again.
pub fn ingest(pairs_csv: &Path, out_dir: &Path, opts: &IngestOptions) -> Result<IngestReport> {
    let (pairs, load) = load_pairs(pairs_csv)?;
    let store = ArticleStore::open(out_dir.join(ARTICLES_DIR))?;
    let base = pairs_csv.parent().unwrap_or(Path::new("."));

    // Unique articles in first-seen order.
    let mut articles: Vec<(String, String, String)> = Vec::new();
    let mut seen = BTreeMap::new();
    for p in &pairs {
        for (id, url, lang) in [(&p.article1_id, &p.url1, &p.lang1), (&p.article2_id, &p.url2, &p.lang2)] {
            if seen.insert(id.clone(), ()).is_none() {
                articles.push((id.clone(), url.clone(), lang.clone()));
            }
        }
    }

    let fetcher = Fetcher::new(opts.politeness.clone());
    let outcomes = par::with_threads(opts.concurrency, || {
        par::map(&articles, |(id, url, lang)| -> std::result::Result<Outcome, String> {
            if store.contains(id) {
                return Ok(Outcome::Reused);
            }
            let html = match resolve(url, base) {
                Source::Remote(u) => fetcher.fetch(&u),
                Source::Local(p) => std::fs::read(&p).map_err(|e| Error::io(p, e)),
            }
            .map_err(|e| e.to_string())?;
            let mut record = extract_article(&html, id, url, &opts.extract).map_err(|e| e.to_string())?;
            if !lang.is_empty() {
                record.language = lang.clone();
            }
            Ok(Outcome::Fetched(Box::new(record)))
        })
    });
    let mut by_id: BTreeMap<&str, std::result::Result<Outcome, String>> =
        articles.iter().map(|(id, _, _)| id.as_str()).zip(outcomes).collect();

    let mut report = IngestReport { load, ..Default::default() };
    for p in &pairs {
        let ids = [(&p.article1_id, &p.url1), (&p.article2_id, &p.url2)];
        let failed: Vec<IngestFailure> = ids
            .iter()
            .filter_map(|(id, url)| match &by_id[id.as_str()] {
                Err(reason) => Some(IngestFailure {
                    pair_id: p.pair_id.clone(),
                    article_id: id.to_string(),
                    url: url.to_string(),
                    reason: reason.clone(),
                }),
                Ok(_) => None,
            })
            .collect();
        if !failed.is_empty() {
            report.failures.extend(failed);
            continue;
        }
        for (id, _) in ids {
            let slot = by_id.get_mut(id.as_str()).expect("every article has an outcome");
            match slot {
                Ok(Outcome::Fetched(record)) => {
                    store.store(record)?;
                    report.articles_stored += 1;
                    *slot = Ok(Outcome::Reused);
                }
                Ok(Outcome::Reused) => {}
                Err(_) => unreachable!("failed articles were handled above"),
            }
        }
        report.pairs_ingested += 1;
    }
    report.articles_reused = articles.iter().filter(|(id, _, _)| store.contains(id)).count() - report.articles_stored;
    write_json(&out_dir.join(INGEST_REPORT), &report)?;
    Ok(report)
}
