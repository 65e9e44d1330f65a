//! Token-vector providers feeding mention pooling and phrase clustering.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Produces one fixed-dimension vector per token of a sentence.
pub trait TokenEncoder: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, tokens: &[&str]) -> Vec<Vec<f64>>;
}

pub const DEFAULT_DIM: usize = 64;
pub const DEFAULT_SEED: u64 = 0x5eed_e8ca_7a70_2020;

/// Seeded random projection of hashed character trigrams.
///
/// Each lowercased token is wrapped as `<token>`; every trigram and the
/// whole wrapped token hash to a pseudo-random vector in `[-1, 1]^dim`, and
/// the sum is L2-normalized. With a non-zero `context_weight` the vector of
/// every token in a `±context_window` neighbourhood is mixed in, scaled by
/// that weight.
#[derive(Debug, Clone)]
pub struct HashedNgramEncoder {
    pub dim: usize,
    pub seed: u64,
    pub context_window: usize,
    pub context_weight: f64,
}

impl Default for HashedNgramEncoder {
    fn default() -> Self {
        HashedNgramEncoder {
            dim: DEFAULT_DIM,
            seed: DEFAULT_SEED,
            context_window: 2,
            context_weight: 0.5,
        }
    }
}

impl HashedNgramEncoder {
    /// Context-free variant: each token's vector depends only on its own characters.
    pub fn context_free(dim: usize, seed: u64) -> Self {
        HashedNgramEncoder {
            dim,
            seed,
            context_window: 0,
            context_weight: 0.0,
        }
    }

    fn feature_vector(&self, feature: &str, out: &mut [f64]) {
        let mut h = FnvHasher::default();
        h.write(feature.as_bytes());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ h.finish());
        for x in out.iter_mut() {
            *x += rng.gen_range(-1.0..1.0);
        }
    }

    /// Context-free vector of one token.
    pub fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let wrapped: Vec<char> = format!("<{}>", token.to_lowercase()).chars().collect();
        let whole: String = wrapped.iter().collect();
        self.feature_vector(&whole, &mut v);
        for w in wrapped.windows(3) {
            let tri: String = w.iter().collect();
            self.feature_vector(&tri, &mut v);
        }
        normalize(&mut v);
        v
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

impl TokenEncoder for HashedNgramEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, tokens: &[&str]) -> Vec<Vec<f64>> {
        let base: Vec<Vec<f64>> = tokens.iter().map(|t| self.token_vector(t)).collect();
        if self.context_window == 0 || self.context_weight == 0.0 {
            return base;
        }
        (0..base.len())
            .map(|i| {
                let mut v = base[i].clone();
                let lo = i.saturating_sub(self.context_window);
                let hi = (i + self.context_window + 1).min(base.len());
                for (j, ctx) in base.iter().enumerate().take(hi).skip(lo) {
                    if j != i {
                        v.iter_mut().zip(ctx).for_each(|(a, b)| *a += self.context_weight * b);
                    }
                }
                v
            })
            .collect()
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
