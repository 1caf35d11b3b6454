use chrono::Utc;
use scraper::{ElementRef, Html, Node, Selector};

use super::ArticleRecord;
use crate::error::{Error, Result};

/// Trailing boilerplate markers. The body is cut at the first
/// (ASCII case-insensitive) occurrence of any of them.
pub const DEFAULT_JUNK_MARKERS: &[&str] = &[
    "related articles",
    "related stories",
    "all rights reserved",
    "sign up for our newsletter",
    "\u{a9}",
];

/// Subtrees whose text never reaches the body or headings.
const SKIPPED_TAGS: &[&str] = &["script", "style", "nav", "footer", "noscript", "template"];

#[derive(Debug, Clone)]
pub struct ExtractConfig {
    pub junk_markers: Vec<String>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self { junk_markers: DEFAULT_JUNK_MARKERS.iter().map(|s| s.to_string()).collect() }
    }
}

/// Extracts title, headings and paragraph body from raw HTML.
///
/// The language is read from the root `lang` attribute when present and is
/// `"und"` otherwise; ingestion overrides it with the dataset's language.
pub fn extract_article(html: &[u8], id: &str, url: &str, config: &ExtractConfig) -> Result<ArticleRecord> {
    let text = String::from_utf8_lossy(html);
    let doc = Html::parse_document(&text);

    let headings_sel = Selector::parse("h1, h2, h3, h4, h5, h6").expect("static selector");
    let para_sel = Selector::parse("p").expect("static selector");
    let title_sel = Selector::parse("title").expect("static selector");
    let html_sel = Selector::parse("html").expect("static selector");

    let mut title = None;
    let mut headings = Vec::new();
    for h in doc.select(&headings_sel).filter(|e| !inside_skipped(e)) {
        let t = element_text(&h);
        if t.is_empty() {
            continue;
        }
        if title.is_none() && h.value().name() == "h1" {
            title = Some(t.clone());
        }
        headings.push(t);
    }
    let title = title
        .or_else(|| doc.select(&title_sel).next().map(|t| element_text(&t)))
        .unwrap_or_default();

    let paragraphs: Vec<String> = doc
        .select(&para_sel)
        .filter(|e| !inside_skipped(e))
        .map(|p| element_text(&p))
        .filter(|t| !t.is_empty())
        .collect();
    let body = strip_junk_suffix(&paragraphs.join("\n"), &config.junk_markers);
    if body.is_empty() {
        return Err(Error::EmptyBody { id: id.to_string() });
    }

    let language = doc
        .select(&html_sel)
        .next()
        .and_then(|e| e.value().attr("lang"))
        .and_then(|l| l.split(['-', '_']).next())
        .filter(|l| !l.is_empty())
        .map(|l| l.to_ascii_lowercase())
        .unwrap_or_else(|| "und".to_string());

    Ok(ArticleRecord {
        id: id.to_string(),
        url: url.to_string(),
        language,
        title,
        headings,
        body,
        fetched_at: Utc::now(),
    })
}

/// Cuts `body` at the earliest occurrence of any marker and trims the
/// remainder.
pub(crate) fn strip_junk_suffix(body: &str, markers: &[String]) -> String {
    // ASCII lowercasing keeps byte offsets aligned with `body`.
    let folded = body.to_ascii_lowercase();
    let cut = markers
        .iter()
        .filter(|m| !m.is_empty())
        .filter_map(|m| folded.find(&m.to_ascii_lowercase()))
        .min()
        .unwrap_or(body.len());
    body[..cut].trim_end().to_string()
}

fn inside_skipped(e: &ElementRef<'_>) -> bool {
    e.ancestors()
        .filter_map(ElementRef::wrap)
        .any(|a| SKIPPED_TAGS.contains(&a.value().name()))
}

/// Text content with script/style descendants dropped and whitespace
/// collapsed to single spaces.
fn element_text(e: &ElementRef<'_>) -> String {
    let mut out = String::new();
    for node in e.descendants() {
        let Node::Text(t) = node.value() else { continue };
        let skipped = node
            .ancestors()
            .take_while(|a| a.id() != e.id())
            .filter_map(ElementRef::wrap)
            .any(|a| SKIPPED_TAGS.contains(&a.value().name()));
        if !skipped {
            out.push_str(t);
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extract(html: &str) -> Result<ArticleRecord> {
        extract_article(html.as_bytes(), "a1", "http://x/a1", &ExtractConfig::default())
    }

    #[test]
    fn minimal_document() {
        let a = extract("<html><body><h1>T</h1><p>Body text.</p></body></html>").unwrap();
        assert_eq!(a.title, "T");
        assert_eq!(a.headings, vec!["T"]);
        assert_eq!(a.body, "Body text.");
        assert_eq!(a.id, "a1");
        assert_eq!(a.language, "und");
    }

    #[test]
    fn headings_in_document_order_and_paragraphs_joined() {
        let a = extract(
            "<html lang=\"de-DE\"><body><h1>Main</h1><p>First   para.</p>\
             <h2>Sub</h2><p>Second\n para.</p></body></html>",
        )
        .unwrap();
        assert_eq!(a.headings, vec!["Main", "Sub"]);
        assert_eq!(a.body, "First para.\nSecond para.");
        assert_eq!(a.language, "de");
    }

    #[test]
    fn scripts_only_is_empty_body() {
        let r = extract("<html><head><script>var x = 1;</script></head><body><div></div><p>  </p></body></html>");
        assert!(matches!(r, Err(Error::EmptyBody { .. })));
    }

    #[test]
    fn nav_footer_and_inline_script_removed() {
        let a = extract(
            "<body><nav><p>Home | World</p></nav><h1>T</h1>\
             <p>Kept <script>bad()</script>text.</p><footer><p>Footer text</p></footer></body>",
        )
        .unwrap();
        assert_eq!(a.body, "Kept text.");
    }

    #[test]
    fn title_falls_back_to_title_element() {
        let a = extract("<html><head><title>Doc</title></head><body><h2>Sub</h2><p>x</p></body></html>").unwrap();
        assert_eq!(a.title, "Doc");
        assert_eq!(a.headings, vec!["Sub"]);
    }

    #[test]
    fn junk_suffix_is_cut() {
        let a = extract(
            "<body><h1>T</h1><p>Real news.</p><p>Related Articles</p><p>Other story</p></body>",
        )
        .unwrap();
        assert_eq!(a.body, "Real news.");
        let markers = vec!["copyright".to_string()];
        assert_eq!(strip_junk_suffix("abc\nCopyright 2020", &markers), "abc");
        assert_eq!(strip_junk_suffix("nothing here", &markers), "nothing here");
    }

    #[test]
    fn junk_at_start_is_empty_body() {
        let r = extract("<body><p>\u{a9} 2021 Example Media</p></body>");
        assert!(matches!(r, Err(Error::EmptyBody { .. })));
    }

    #[test]
    fn invalid_utf8_is_decoded_lossily() {
        let mut bytes = b"<body><p>caf".to_vec();
        bytes.push(0xff);
        bytes.extend_from_slice(b"</p></body>");
        let a = extract_article(&bytes, "x", "u", &ExtractConfig::default()).unwrap();
        assert!(a.body.starts_with("caf"));
    }
}
