use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::EmbeddingVector;
use crate::error::{Error, Result};

pub const DEFAULT_DIM: usize = 384;
/// Word limit of the sentence-embedding models this engine targets.
pub const DEFAULT_MAX_TOKENS: usize = 256;

/// Source of fixed-dimension text embeddings.
///
/// `embed` must be deterministic per instance and safe to call from
/// several threads at once.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn max_tokens(&self) -> usize;
    /// Empty when the provider makes no language claims.
    fn supported_languages(&self) -> &BTreeSet<String>;
    fn embed(&self, text: &str) -> Result<EmbeddingVector>;
}

/// Hermetic bag-of-tokens embedder.
///
/// Every lowercased token maps to a pseudorandom unit vector derived from
/// `(seed, token)`; a text embeds to the normalized sum over its tokens.
/// Texts sharing many tokens therefore have high cosine similarity.
#[derive(Debug, Clone)]
pub struct StubProvider {
    name: String,
    dim: usize,
    seed: u64,
    max_tokens: usize,
    languages: BTreeSet<String>,
}

impl StubProvider {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim > 0, "stub embedding dimension must be positive");
        Self {
            name: format!("stub-d{dim}-s{seed}"),
            dim,
            seed,
            max_tokens: DEFAULT_MAX_TOKENS,
            languages: BTreeSet::new(),
        }
    }

    pub fn with_max_tokens(mut self, max_tokens: usize) -> Self {
        self.max_tokens = max_tokens.max(1);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Unit vector assigned to one (already lowercased) token.
    pub fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(token.as_bytes());
        let digest: [u8; 32] = h.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(digest);
        let mut v: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}

impl EmbeddingProvider for StubProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    fn supported_languages(&self) -> &BTreeSet<String> {
        &self.languages
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let mut tokens: Vec<String> = text.split_whitespace().map(str::to_lowercase).collect();
        if tokens.is_empty() {
            return Err(Error::EmptyText);
        }
        // Sorted summation makes the result independent of token order,
        // bit for bit.
        tokens.sort_unstable();
        let mut acc = vec![0.0; self.dim];
        for tok in &tokens {
            for (a, x) in acc.iter_mut().zip(self.token_vector(tok)) {
                *a += x;
            }
        }
        let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        EmbeddingVector::new(acc.into_iter().map(|x| x / norm).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::cosine_similarity;
    use proptest::prelude::*;

    #[test]
    fn unit_norm_and_deterministic() {
        let p = StubProvider::new(384, 7);
        let a = p.embed("Floods hit Paris").unwrap();
        assert_eq!(a.dim(), 384);
        assert!((a.norm() - 1.0).abs() < 1e-9);
        assert_eq!(a, StubProvider::new(384, 7).embed("Floods hit Paris").unwrap());
        assert_ne!(a, StubProvider::new(384, 8).embed("Floods hit Paris").unwrap());
    }

    #[test]
    fn shared_tokens_raise_similarity() {
        let p = StubProvider::new(384, 1);
        let base = p.embed("storm floods river city rain").unwrap();
        let close = p.embed("storm floods river town rain").unwrap();
        let far = p.embed("election vote party budget minister").unwrap();
        assert!(cosine_similarity(&base, &close).unwrap() > 0.7);
        assert!(cosine_similarity(&base, &far).unwrap().abs() < 0.3);
    }

    #[test]
    fn empty_text_is_an_error() {
        assert!(matches!(StubProvider::new(8, 0).embed("   "), Err(Error::EmptyText)));
    }

    proptest! {
        #[test]
        fn token_order_invariance(mut words in proptest::collection::vec("[a-zA-Z]{1,6}", 1..20), seed: u64) {
            let p = StubProvider::new(16, seed);
            let a = p.embed(&words.join(" ")).unwrap();
            words.reverse();
            let b = p.embed(&words.join("  ")).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!((a.norm() - 1.0).abs() < 1e-9);
        }
    }
}
