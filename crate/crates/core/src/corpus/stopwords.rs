//! Bundled stopword lists.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

const LISTS: &[(&str, &str)] = &[
    ("ar", include_str!("../../data/stopwords/ar.txt")),
    ("de", include_str!("../../data/stopwords/de.txt")),
    ("en", include_str!("../../data/stopwords/en.txt")),
    ("es", include_str!("../../data/stopwords/es.txt")),
    ("fr", include_str!("../../data/stopwords/fr.txt")),
    ("pl", include_str!("../../data/stopwords/pl.txt")),
    ("tr", include_str!("../../data/stopwords/tr.txt")),
];

fn tables() -> &'static HashMap<&'static str, HashSet<String>> {
    static TABLES: OnceLock<HashMap<&'static str, HashSet<String>>> = OnceLock::new();
    TABLES.get_or_init(|| {
        LISTS
            .iter()
            .map(|(lang, raw)| {
                let words = raw.lines().map(str::trim).filter(|w| !w.is_empty()).map(str::to_lowercase).collect();
                (*lang, words)
            })
            .collect()
    })
}

/// Language codes with a bundled list.
pub fn supported_languages() -> Vec<&'static str> {
    LISTS.iter().map(|(l, _)| *l).collect()
}

pub fn stopwords(language: &str) -> Option<&'static HashSet<String>> {
    tables().get(language.to_ascii_lowercase().as_str())
}

fn match_key(token: &str) -> String {
    token.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// Drops whitespace-delimited tokens found in the language's stopword list.
///
/// Matching ignores case and surrounding punctuation; surviving tokens keep
/// their original form and order and are joined by single spaces. Unknown
/// languages return the text unchanged and log a warning.
pub fn remove_stopwords(text: &str, language: &str) -> String {
    let Some(list) = stopwords(language) else {
        log::warn!("no stopword list for language {language:?}; text left unchanged");
        return text.to_string();
    };
    text.split_whitespace()
        .filter(|tok| !list.contains(&match_key(tok)))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn english_example() {
        assert_eq!(remove_stopwords("the cat sat on the mat", "en"), "cat sat mat");
        assert_eq!(remove_stopwords("", "en"), "");
    }

    #[test]
    fn case_and_punctuation_only_affect_matching() {
        assert_eq!(remove_stopwords("The Cat, and THE dog.", "en"), "Cat, dog.");
        assert_eq!(remove_stopwords("Der Hund und die Katze", "DE"), "Hund Katze");
    }

    #[test]
    fn unknown_language_is_identity() {
        let t = "the  cat sat";
        assert_eq!(remove_stopwords(t, "xx"), t);
    }

    #[test]
    fn all_bundled_lists_load() {
        for lang in supported_languages() {
            assert!(stopwords(lang).unwrap().len() > 20, "{lang}");
        }
    }

    proptest! {
        #[test]
        fn idempotent(words in proptest::collection::vec("[a-zA-Z]{1,6}|the|on|and|The", 0..30)) {
            let text = words.join(" ");
            let once = remove_stopwords(&text, "en");
            prop_assert_eq!(remove_stopwords(&once, "en"), once);
        }
    }
}
