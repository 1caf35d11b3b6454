//! Lexicon + pattern recognizer used as the reference [`NerProvider`].

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use regex::{Regex, RegexBuilder};

use super::{Entity, NerProvider};
use crate::error::{Error, Result};

pub const GAZETTEER_NAME: &str = "gazetteer-v1";

/// Pseudo-label marking organization suffixes ("Inc", "GmbH", ...).
const ORG_SUFFIX: &str = "ORG_SUFFIX";
/// Longest run of capitalized words taken in front of an org suffix.
const MAX_ORG_NAME_TOKENS: usize = 4;

const BUNDLED_TABLES: &[(&str, &str)] = &[
    ("organizations.tsv", include_str!("../../data/gazetteer/organizations.tsv")),
    ("persons.tsv", include_str!("../../data/gazetteer/persons.tsv")),
    ("places.tsv", include_str!("../../data/gazetteer/places.tsv")),
    ("temporal.tsv", include_str!("../../data/gazetteer/temporal.tsv")),
];

const BUNDLED_LANGUAGES: &[&str] = &["ar", "de", "en", "es", "fr", "pl", "tr"];

const MONTHS: &str = "January|February|March|April|May|June|July|August|September|October|November|December|\
                      Jan\\.?|Feb\\.?|Mar\\.?|Apr\\.?|Jun\\.?|Jul\\.?|Aug\\.?|Sept?\\.?|Oct\\.?|Nov\\.?|Dec\\.?";

/// Surface-form table: folded token sequence → label.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: HashMap<String, String>,
    max_tokens: usize,
    case_insensitive: bool,
}

impl Lexicon {
    pub fn new(case_insensitive: bool) -> Self {
        Self { entries: HashMap::new(), max_tokens: 0, case_insensitive }
    }

    fn fold(&self, s: &str) -> String {
        if self.case_insensitive {
            s.to_lowercase()
        } else {
            s.to_string()
        }
    }

    /// Adds one entry. The first label registered for a surface form wins.
    pub fn insert(&mut self, surface: &str, label: &str) {
        let toks: Vec<&str> = tokenize(surface).into_iter().map(|(s, e)| &surface[s..e]).collect();
        if toks.is_empty() {
            return;
        }
        self.max_tokens = self.max_tokens.max(toks.len());
        let key = self.fold(&toks.join(" "));
        self.entries.entry(key).or_insert_with(|| label.trim().to_uppercase());
    }

    /// Parses `surface<TAB>LABEL` lines; blank lines and `#` comments are
    /// ignored.
    pub fn add_table(&mut self, source: &str, content: &str) -> Result<()> {
        for (n, line) in content.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, label) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("{source}:{}: expected surface<TAB>LABEL", n + 1)))?;
            if surface.trim().is_empty() || label.trim().is_empty() {
                return Err(Error::Format(format!("{source}:{}: empty surface or label", n + 1)));
            }
            self.insert(surface.trim(), label);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn lookup(&self, key: &str) -> Option<&str> {
        self.entries.get(&self.fold(key)).map(String::as_str)
    }
}

/// Reference recognizer: longest-match lexicon lookup, capitalized names
/// ending in an organization suffix, and regex date/time patterns.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    name: String,
    lexicon: Lexicon,
    patterns: Vec<(Regex, &'static str)>,
    languages: BTreeSet<String>,
}

impl Gazetteer {
    pub fn new(name: impl Into<String>, lexicon: Lexicon) -> Self {
        let ci = lexicon.case_insensitive;
        let build = |p: &str| RegexBuilder::new(p).case_insensitive(ci).build().expect("static pattern");
        let m = MONTHS;
        let patterns = vec![
            (build(r"\b\d{4}-\d{2}-\d{2}\b"), "DATE"),
            (build(r"\b\d{1,2}[./]\d{1,2}[./]\d{2,4}\b"), "DATE"),
            (build(&format!(r"\b(?:{m})\s+\d{{1,2}}(?:st|nd|rd|th)?(?:,?\s+\d{{4}})?\b")), "DATE"),
            (build(&format!(r"\b\d{{1,2}}(?:st|nd|rd|th)?\s+(?:of\s+)?(?:{m})(?:,?\s+\d{{4}})?")), "DATE"),
            (build(&format!(r"\b(?:{m})\s+\d{{4}}\b")), "DATE"),
            (build(r"\b(?:19|20)\d{2}\b"), "DATE"),
            (build(r"\b\d{1,2}:\d{2}(?:\s?[ap]\.?m\b\.?)?"), "TIME"),
            (build(r"\b\d{1,2}\s?[ap]\.?m\b\.?"), "TIME"),
        ];
        Self {
            name: name.into(),
            lexicon,
            patterns,
            languages: BUNDLED_LANGUAGES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Recognizer over the bundled tables, case-insensitive.
    pub fn bundled() -> Self {
        let mut lex = Lexicon::new(true);
        for (name, content) in BUNDLED_TABLES {
            lex.add_table(name, content).expect("bundled gazetteer tables are well formed");
        }
        Self::new(GAZETTEER_NAME, lex)
    }

    /// Loads every `*.tsv` / `*.txt` table in `dir`, in file-name order.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("tsv" | "txt")))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::Config(format!("no gazetteer tables in {}", dir.display())));
        }
        let mut lex = Lexicon::new(true);
        for f in &files {
            let content = std::fs::read_to_string(f).map_err(|e| Error::io(f, e))?;
            lex.add_table(&f.display().to_string(), &content)?;
        }
        Ok(Self::new(format!("{GAZETTEER_NAME}:{}", dir.display()), lex))
    }

    pub fn with_languages(mut self, languages: impl IntoIterator<Item = String>) -> Self {
        self.languages = languages.into_iter().collect();
        self
    }

    fn candidates(&self, text: &str) -> Vec<Entity> {
        let mut out = Vec::new();
        let tokens = tokenize(text);

        for i in 0..tokens.len() {
            let longest = self.lexicon.max_tokens.min(tokens.len() - i);
            for len in (1..=longest).rev() {
                let (start, end) = (tokens[i].0, tokens[i + len - 1].1);
                let key = tokens[i..i + len].iter().map(|&(s, e)| &text[s..e]).collect::<Vec<_>>().join(" ");
                if let Some(label) = self.lexicon.lookup(&key) {
                    if label != ORG_SUFFIX {
                        out.push(entity(text, start, end, label));
                    }
                    break;
                }
            }

            // Capitalized names followed by an organization suffix.
            let (s, e) = tokens[i];
            if self.lexicon.lookup(&text[s..e]) == Some(ORG_SUFFIX) {
                let mut first = i;
                while first > 0 && i - first < MAX_ORG_NAME_TOKENS && is_capitalized(&text[tokens[first - 1].0..]) {
                    first -= 1;
                }
                if first < i {
                    out.push(entity(text, tokens[first].0, e, "ORGANIZATION"));
                }
            }
        }

        for (re, label) in &self.patterns {
            out.extend(re.find_iter(text).map(|m| entity(text, m.start(), m.end(), label)));
        }
        out
    }
}

fn entity(text: &str, start: usize, end: usize, label: &str) -> Entity {
    Entity { text: text[start..end].to_string(), label: label.to_string(), start, end }
}

fn is_capitalized(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

/// Word tokens as byte ranges. A token is a run of alphanumerics, possibly
/// joined by `-`, `'`, `’`, `.` or `&` when an alphanumeric follows.
fn tokenize(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if c.is_alphanumeric() {
            start.get_or_insert(i);
            continue;
        }
        let joiner = matches!(c, '-' | '\'' | '\u{2019}' | '.' | '&');
        let next_alnum = iter.peek().is_some_and(|&(_, n)| n.is_alphanumeric());
        if start.is_some() && joiner && next_alnum {
            continue;
        }
        if let Some(s) = start.take() {
            out.push((s, i));
        }
    }
    if let Some(s) = start {
        out.push((s, text.len()));
    }
    out
}

impl NerProvider for Gazetteer {
    fn name(&self) -> &str {
        &self.name
    }

    fn supported_languages(&self) -> &BTreeSet<String> {
        &self.languages
    }

    /// Resolves overlapping candidates left to right, preferring the longest
    /// match at each position.
    fn recognize(&self, text: &str, _language: &str) -> Result<Vec<Entity>> {
        let mut cands = self.candidates(text);
        cands.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
        let mut out: Vec<Entity> = Vec::new();
        let mut covered = 0;
        for c in cands {
            if c.start >= covered {
                covered = c.end;
                out.push(c);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(text: &str) -> Vec<(String, String)> {
        Gazetteer::bundled()
            .recognize(text, "en")
            .unwrap()
            .into_iter()
            .map(|e| (e.label, e.text))
            .collect()
    }

    fn pairs(xs: &[(&str, &str)]) -> Vec<(String, String)> {
        xs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn person_location_date() {
        assert_eq!(
            labels("Angela Merkel visited Madrid in March 2020"),
            pairs(&[("PERSON", "Angela Merkel"), ("LOCATION", "Madrid"), ("DATE", "March 2020")])
        );
    }

    #[test]
    fn empty_text() {
        assert!(labels("").is_empty());
    }

    #[test]
    fn case_folding() {
        assert_eq!(labels("paris"), pairs(&[("LOCATION", "paris")]));
        let mut lex = Lexicon::new(false);
        lex.insert("Paris", "LOCATION");
        assert!(Gazetteer::new("cs", lex).recognize("paris", "en").unwrap().is_empty());
    }

    #[test]
    fn longest_match_wins() {
        assert_eq!(labels("He flew to New York."), pairs(&[("LOCATION", "New York")]));
        assert_eq!(labels("Mexico City and Mexico"), pairs(&[("LOCATION", "Mexico City"), ("LOCATION", "Mexico")]));
    }

    #[test]
    fn org_suffix_and_times() {
        assert_eq!(
            labels("Shares of Acme Widgets Inc rose at 10:30 am on 2021-03-04."),
            pairs(&[("ORGANIZATION", "Acme Widgets Inc"), ("TIME", "10:30 am"), ("DATE", "2021-03-04")])
        );
        assert_eq!(labels("lowercase inc"), vec![]);
    }

    #[test]
    fn non_ascii_offsets() {
        let text = "Proteste in München und Köln am Montag.";
        let ents = Gazetteer::bundled().recognize(text, "de").unwrap();
        let got: Vec<&str> = ents.iter().map(|e| e.text.as_str()).collect();
        assert_eq!(got, vec!["München", "Köln", "Montag"]);
        for e in ents {
            assert_eq!(&text[e.start..e.end], e.text);
        }
    }

    #[test]
    fn tables_reject_malformed_lines() {
        let mut lex = Lexicon::new(true);
        assert!(lex.add_table("t", "# comment\n\nParis\tLOCATION\n").is_ok());
        assert_eq!(lex.len(), 1);
        assert!(matches!(lex.add_table("t", "Paris LOCATION\n"), Err(Error::Format(_))));
    }

    #[test]
    fn from_dir_loads_tables() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.tsv"), "Springfield\tLOCATION\n").unwrap();
        let g = Gazetteer::from_dir(dir.path()).unwrap();
        let e = g.recognize("Back in Springfield.", "en").unwrap();
        assert_eq!(e[0].text, "Springfield");
        assert!(g.name().starts_with(GAZETTEER_NAME));
        assert!(Gazetteer::from_dir(tempfile::tempdir().unwrap().path()).is_err());
    }

    proptest! {
        #[test]
        fn offsets_slice_to_text(text in "(\\PC|Paris|March 2020|Berlin Inc|12:30){0,40}") {
            let ents = Gazetteer::bundled().recognize(&text, "en").unwrap();
            let mut prev_end = 0;
            for e in ents {
                prop_assert!(e.start < e.end && e.end <= text.len());
                prop_assert_eq!(&text[e.start..e.end], e.text.as_str());
                prop_assert!(e.start >= prev_end);
                prev_end = e.end;
            }
        }
    }
}
