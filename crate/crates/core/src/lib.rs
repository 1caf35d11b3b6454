//! Similarity scoring for pairs of news articles.
//!
//! Articles are scored along seven dimensions ([`MetricKind`]). Each
//! dimension has its own feature pipeline (entity spans or full text),
//! the spans are embedded through a pluggable [`embedding::EmbeddingProvider`],
//! mean-pooled, and then either compared directly by cosine similarity
//! (the baseline) or concatenated and fed to a small per-dimension
//! regression head trained with SGD and momentum.
//!
//! The `parallel` feature (on by default) runs the data-parallel loops
//! (per-article extraction, per-span embedding, per-metric training and
//! scoring) on rayon. Without it every loop runs sequentially; results are
//! identical either way.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod features;
pub mod metric;
pub mod model;
pub mod par;
pub mod pipeline;

pub use error::{Error, Result};
pub use metric::MetricKind;
