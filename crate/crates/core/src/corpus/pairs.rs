use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize_score, ArticleStore, PairRecord};
use crate::error::{Error, Result};
use crate::metric::MetricKind;

/// Accepted header spellings per logical column, matched case-insensitively.
const PAIR_ID: &[&str] = &["pair_id"];
const URL1: &[&str] = &["url1", "link1"];
const URL2: &[&str] = &["url2", "link2"];
const ID1: &[&str] = &["id1", "article1_id"];
const ID2: &[&str] = &["id2", "article2_id"];
const LANG1: &[&str] = &["lang1", "url1_lang"];
const LANG2: &[&str] = &["lang2", "url2_lang"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    /// 1-based line number in the CSV, or 0 for rows dropped after loading.
    pub line: u64,
    pub pair_id: String,
    pub reason: String,
}

/// Outcome of [`load_pairs`]: what was kept and why the rest was not.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub loaded: usize,
    pub skipped: Vec<SkippedRow>,
    /// Loaded pairs per language pair, e.g. `"en-en"`.
    pub languages: BTreeMap<String, usize>,
}

impl LoadReport {
    fn recount(&mut self, pairs: &[PairRecord]) {
        self.loaded = pairs.len();
        self.languages.clear();
        for p in pairs {
            *self.languages.entry(p.lang_pair.clone()).or_default() += 1;
        }
    }
}

struct Columns {
    pair_id: usize,
    url1: Option<usize>,
    url2: Option<usize>,
    id1: Option<usize>,
    id2: Option<usize>,
    lang1: usize,
    lang2: usize,
    metrics: Vec<(MetricKind, usize)>,
}

impl Columns {
    fn from_header(header: &csv::StringRecord) -> Result<Self> {
        let names: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
        let find = |aliases: &[&str]| names.iter().position(|n| aliases.contains(&n.as_str()));
        let require = |aliases: &[&str]| {
            find(aliases).ok_or_else(|| Error::Format(format!("CSV header lacks column {:?}", aliases[0])))
        };
        let metrics = MetricKind::ALL
            .into_iter()
            .map(|m| require(&[m.as_str()]).map(|i| (m, i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Columns {
            pair_id: require(PAIR_ID)?,
            url1: find(URL1),
            url2: find(URL2),
            id1: find(ID1),
            id2: find(ID2),
            lang1: require(LANG1)?,
            lang2: require(LANG2)?,
            metrics,
        })
    }
}

/// Loads a pair dataset from a CSV file. See [`load_pairs_from_reader`].
pub fn load_pairs(path: &Path) -> Result<(Vec<PairRecord>, LoadReport)> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    load_pairs_from_reader(file)
}

/// Parses pair rows. Columns are located by header name, so their order is
/// free. Article ids default to the two halves of an `<id1>_<id2>` pair id
/// when no id columns exist. Rows with blank, unparseable or out-of-range
/// scores are skipped and listed in the report.
pub fn load_pairs_from_reader<R: Read>(reader: R) -> Result<(Vec<PairRecord>, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Format(format!("unreadable CSV header: {e}")))?
        .clone();
    if header.is_empty() {
        return Err(Error::Format("CSV has no header row".into()));
    }
    let cols = Columns::from_header(&header)?;

    let mut pairs = Vec::new();
    let mut report = LoadReport::default();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Format(format!("malformed CSV row: {e}")))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize| row.get(i).map(str::trim).unwrap_or("");
        let pair_id = get(cols.pair_id).to_string();
        match parse_row(&cols, &row, &pair_id) {
            Ok(p) => pairs.push(p),
            Err(reason) => report.skipped.push(SkippedRow { line, pair_id, reason }),
        }
    }
    report.recount(&pairs);
    Ok((pairs, report))
}

fn parse_row(cols: &Columns, row: &csv::StringRecord, pair_id: &str) -> std::result::Result<PairRecord, String> {
    let get = |i: Option<usize>| i.and_then(|i| row.get(i)).map(str::trim).unwrap_or("").to_string();
    if pair_id.is_empty() {
        return Err("missing pair id".into());
    }
    let (mut id1, mut id2) = (get(cols.id1), get(cols.id2));
    if id1.is_empty() || id2.is_empty() {
        match pair_id.split_once('_') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => {
                id1 = a.to_string();
                id2 = b.to_string();
            }
            _ => return Err("missing article ids".into()),
        }
    }
    let (lang1, lang2) = (get(Some(cols.lang1)).to_lowercase(), get(Some(cols.lang2)).to_lowercase());
    let mut raw_scores = BTreeMap::new();
    for &(metric, idx) in &cols.metrics {
        let cell = get(Some(idx));
        if cell.is_empty() {
            return Err(format!("missing {metric} score"));
        }
        let raw: f64 = cell.parse().map_err(|_| format!("unparseable {metric} score {cell:?}"))?;
        normalize_score(raw).map_err(|_| format!("{metric} score {raw} outside [1, 4]"))?;
        raw_scores.insert(metric, raw);
    }
    Ok(PairRecord {
        pair_id: pair_id.to_string(),
        article1_id: id1,
        article2_id: id2,
        url1: get(cols.url1),
        url2: get(cols.url2),
        lang_pair: format!("{lang1}-{lang2}"),
        lang1,
        lang2,
        raw_scores,
    })
}

/// Drops pairs whose articles are missing from `store`, recording each in
/// the report.
pub fn retain_available(pairs: Vec<PairRecord>, store: &ArticleStore, report: &mut LoadReport) -> Vec<PairRecord> {
    let mut kept = Vec::with_capacity(pairs.len());
    for p in pairs {
        let missing: Vec<&str> = [&p.article1_id, &p.article2_id]
            .into_iter()
            .filter(|id| !store.contains(id))
            .map(String::as_str)
            .collect();
        if missing.is_empty() {
            kept.push(p);
        } else {
            report.skipped.push(SkippedRow {
                line: 0,
                pair_id: p.pair_id.clone(),
                reason: format!("article unavailable: {}", missing.join(", ")),
            });
        }
    }
    report.recount(&kept);
    kept
}
