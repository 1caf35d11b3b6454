//! Text embeddings, pooling and the cosine-similarity baseline.

mod cache;
mod provider;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::FeatureBundle;
use crate::par;

pub use cache::{read_cache, write_cache, CacheHeader, CacheProvider};
pub use provider::{EmbeddingProvider, StubProvider, DEFAULT_DIM, DEFAULT_MAX_TOKENS};

/// Fixed-length vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Argument("embedding must have at least one coordinate".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("embedding coordinate {bad} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }
}

/// One embedding row per span, all of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: Vec<EmbeddingVector>,
}

impl EmbeddingMatrix {
    pub fn new(rows: Vec<EmbeddingVector>) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Argument("embedding matrix needs a row".into()))?;
        let dim = first.dim();
        if let Some(r) = rows.iter().find(|r| r.dim() != dim) {
            return Err(Error::Dimension { expected: dim, actual: r.dim() });
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[EmbeddingVector] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].dim()
    }
}

/// Keeps the first `max_tokens` whitespace-delimited tokens, joined by
/// single spaces.
pub fn truncate_tokens(text: &str, max_tokens: usize) -> String {
    text.split_whitespace().take(max_tokens.max(1)).collect::<Vec<_>>().join(" ")
}

/// SHA-256 hex digest of a post-truncation span; the embedding-cache key.
pub fn span_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Embeds every span of a bundle after truncation to the provider's limit.
pub fn embed_bundle(bundle: &FeatureBundle, provider: &dyn EmbeddingProvider) -> Result<EmbeddingMatrix> {
    let max = provider.max_tokens();
    let rows = par::try_map(&bundle.spans, |span| provider.embed(&truncate_tokens(span, max)))?;
    EmbeddingMatrix::new(rows)
}

/// Coordinate-wise mean of the rows.
pub fn mean_pool(m: &EmbeddingMatrix) -> EmbeddingVector {
    let mut acc = vec![0.0; m.dim()];
    for row in m.rows() {
        for (a, v) in acc.iter_mut().zip(row.as_slice()) {
            *a += v;
        }
    }
    let k = m.n_rows() as f64;
    EmbeddingVector(acc.into_iter().map(|a| a / k).collect())
}

fn check_dims(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), actual: b.dim() });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `dot(a, b) / (|a| |b|)`, clamped into [-1, 1] against rounding.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    check_dims(a, b)?;
    let (aa, bb) = (dot(&a.0, &a.0), dot(&b.0, &b.0));
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::ZeroVector);
    }
    // sqrt(x * x) == x exactly, so cos(v, v) is exactly 1.
    Ok((dot(&a.0, &b.0) / (aa * bb).sqrt()).clamp(-1.0, 1.0))
}

/// Cosine similarity with negative values clamped to 0, so it lives on
/// the same [0, 1] scale as normalized labels.
pub fn baseline_score(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    Ok(cosine_similarity(a, b)?.max(0.0))
}

/// `a` followed by `b`.
pub fn concat(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<EmbeddingVector> {
    check_dims(a, b)?;
    let mut v = Vec::with_capacity(a.dim() * 2);
    v.extend_from_slice(&a.0);
    v.extend_from_slice(&b.0);
    Ok(EmbeddingVector(v))
}
