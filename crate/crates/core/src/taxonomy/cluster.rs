//! Committee-based clustering of candidate trigger phrases, used as an
//! authoring aid when defining new event types.
//!
//! This is a reduced form of committee clustering:
//!
//! 1. every phrase forms a candidate committee with its `top_k` nearest
//!    neighbours whose cosine similarity is at least `similarity_threshold`;
//! 2. candidates smaller than `committee_min_size` are dropped and the rest
//!    are scored by average pairwise cosine similarity (a singleton scores 1);
//! 3. candidates are visited by descending score and accepted when their
//!    centroid is less than `similarity_threshold` similar to the centroid
//!    of every committee accepted so far;
//! 4. each phrase joins the committee whose centroid it is most similar to.
//!
//! Clusters come back largest first. The refinement phase of the original
//! algorithm (re-clustering residue elements) is not performed.

use serde::{Deserialize, Serialize};

use super::TaxonomyError;
use crate::corpus::tokenize;
use crate::vectors::{cosine, HashedNgramEncoder, TokenEncoder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseVector {
    pub phrase: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub similarity_threshold: f64,
    pub committee_min_size: usize,
    pub top_k: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            similarity_threshold: 0.5,
            committee_min_size: 2,
            top_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub centroid: Vec<f64>,
    /// Indices into the input phrase list, ascending.
    pub members: Vec<usize>,
    pub phrases: Vec<String>,
}

/// Phrase vector = mean of the default encoder's token vectors.
pub fn embed_phrases(phrases: &[String], encoder: &HashedNgramEncoder) -> Vec<PhraseVector> {
    phrases
        .iter()
        .map(|p| {
            let toks: Vec<&str> = tokenize(p).iter().map(|s| &p[s.start..s.end]).collect();
            let vecs = encoder.encode(&toks);
            let mut mean = vec![0.0; encoder.dim()];
            for v in &vecs {
                mean.iter_mut().zip(v).for_each(|(m, x)| *m += x);
            }
            if !vecs.is_empty() {
                mean.iter_mut().for_each(|m| *m /= vecs.len() as f64);
            }
            PhraseVector {
                phrase: p.clone(),
                vector: mean,
            }
        })
        .collect()
}

fn centroid(vectors: &[&[f64]]) -> Vec<f64> {
    let dim = vectors[0].len();
    let mut c = vec![0.0; dim];
    for v in vectors {
        c.iter_mut().zip(v.iter()).for_each(|(a, b)| *a += b);
    }
    c.iter_mut().for_each(|a| *a /= vectors.len() as f64);
    c
}

struct Candidate {
    members: Vec<usize>,
    score: f64,
}

pub fn discover_event_clusters(
    phrases: &[PhraseVector],
    params: &ClusterParams,
) -> Result<Vec<Cluster>, TaxonomyError> {
    if phrases.len() < 2 {
        return Err(TaxonomyError::TooFewPhrases(phrases.len()));
    }
    let dim = phrases[0].vector.len();
    for p in phrases {
        if p.vector.len() != dim {
            return Err(TaxonomyError::DimensionMismatch {
                phrase: p.phrase.clone(),
                expected: dim,
                found: p.vector.len(),
            });
        }
        if p.vector.iter().any(|x| !x.is_finite()) {
            return Err(TaxonomyError::NonFinite(p.phrase.clone()));
        }
    }
    let n = phrases.len();
    let sim: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| cosine(&phrases[i].vector, &phrases[j].vector)).collect())
        .collect();

    let mut candidates: Vec<Candidate> = Vec::new();
    for i in 0..n {
        let mut neighbours: Vec<usize> = (0..n)
            .filter(|&j| j != i && sim[i][j] >= params.similarity_threshold)
            .collect();
        // stable sort keeps index order among equal similarities
        neighbours.sort_by(|&a, &b| sim[i][b].total_cmp(&sim[i][a]));
        neighbours.truncate(params.top_k);
        let mut members = neighbours;
        members.push(i);
        members.sort_unstable();
        if members.len() < params.committee_min_size.max(1) {
            continue;
        }
        if candidates.iter().any(|c| c.members == members) {
            continue;
        }
        let score = if members.len() == 1 {
            1.0
        } else {
            let mut total = 0.0;
            let mut pairs = 0usize;
            for (a, &x) in members.iter().enumerate() {
                for &y in &members[a + 1..] {
                    total += sim[x][y];
                    pairs += 1;
                }
            }
            total / pairs as f64
        };
        candidates.push(Candidate { members, score });
    }
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(b.members.len().cmp(&a.members.len()))
            .then(a.members.cmp(&b.members))
    });

    let mut committees: Vec<Vec<f64>> = Vec::new();
    for c in &candidates {
        let vs: Vec<&[f64]> = c.members.iter().map(|&m| phrases[m].vector.as_slice()).collect();
        let cent = centroid(&vs);
        if committees.iter().all(|acc| cosine(acc, &cent) < params.similarity_threshold) {
            committees.push(cent);
        }
    }
    if committees.is_empty() {
        // nothing met the size bar: every phrase becomes its own committee
        committees = phrases.iter().map(|p| p.vector.clone()).collect();
    }

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); committees.len()];
    for (i, p) in phrases.iter().enumerate() {
        let mut best = 0;
        let mut best_sim = f64::NEG_INFINITY;
        for (k, c) in committees.iter().enumerate() {
            let s = cosine(&p.vector, c);
            if s > best_sim {
                best = k;
                best_sim = s;
            }
        }
        groups[best].push(i);
    }

    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|members| {
            let vs: Vec<&[f64]> = members.iter().map(|&m| phrases[m].vector.as_slice()).collect();
            Cluster {
                centroid: centroid(&vs),
                phrases: members.iter().map(|&m| phrases[m].phrase.clone()).collect(),
                members,
            }
        })
        .collect();
    clusters.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.members[0].cmp(&b.members[0])));
    Ok(clusters)
}
