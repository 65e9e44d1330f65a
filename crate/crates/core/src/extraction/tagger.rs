//! Linear-chain BIO tagger trained with the averaged structured perceptron.
//!
//! A label sequence `y` for tokens `x` scores
//! `sum_i emit(x, i, y_i) + trans(y_{i-1}, y_i)` where `y_{-1}` is a start
//! state and `emit` sums the weights of the token's active features for the
//! label. Decoding is exact. Among equal-scoring sequences the
//! lexicographically smallest one wins, comparing positions left to right in
//! label order (`O` first, then the remaining labels sorted).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bio::{is_valid_label, TagSequence, OUTSIDE};
use super::ExtractionError;
use crate::corpus::Sentence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTaggerModel {
    /// `O` first, then lexicographic.
    pub labels: Vec<String>,
    /// feature -> weight per label (indexed like `labels`).
    pub emissions: BTreeMap<String, Vec<f64>>,
    /// `labels.len() + 1` rows (the last is the start state) by `labels.len()` columns.
    pub transitions: Vec<Vec<f64>>,
}

fn shape(word: &str) -> String {
    let mut out = String::new();
    for c in word.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_ascii_digit() {
            'd'
        } else {
            c
        };
        if !out.ends_with(s) {
            out.push(s);
        }
    }
    out
}

/// Emission features of token `i`: identity, lowercase form, lowercase words
/// in a ±2 window, word shape, 3-char suffix and a bias.
pub fn token_features(words: &[&str], i: usize) -> Vec<String> {
    let lower = |j: isize| -> String {
        if j < 0 {
            "<s>".to_string()
        } else if j as usize >= words.len() {
            "</s>".to_string()
        } else {
            words[j as usize].to_lowercase()
        }
    };
    let w = words[i];
    let lw = w.to_lowercase();
    let chars: Vec<char> = lw.chars().collect();
    let suffix: String = chars[chars.len().saturating_sub(3)..].iter().collect();
    let i = i as isize;
    vec![
        "bias".to_string(),
        format!("w={w}"),
        format!("lw={lw}"),
        format!("w-1={}", lower(i - 1)),
        format!("w-2={}", lower(i - 2)),
        format!("w+1={}", lower(i + 1)),
        format!("w+2={}", lower(i + 2)),
        format!("shape={}", shape(w)),
        format!("suf3={suffix}"),
    ]
}

impl LinearTaggerModel {
    /// A model with all weights zero over the given tag set (plus `O`).
    pub fn zeros<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut set: BTreeSet<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        set.remove(OUTSIDE);
        let mut labels = vec![OUTSIDE.to_string()];
        labels.extend(set);
        let n = labels.len();
        LinearTaggerModel {
            labels,
            emissions: BTreeMap::new(),
            transitions: vec![vec![0.0; n]; n + 1],
        }
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    fn start_row(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `scores[i][y]` for every token and label.
    pub fn emission_scores(&self, words: &[&str]) -> Vec<Vec<f64>> {
        let n = self.labels.len();
        (0..words.len())
            .map(|i| {
                let mut s = vec![0.0; n];
                for f in token_features(words, i) {
                    if let Some(w) = self.emissions.get(&f) {
                        s.iter_mut().zip(w).for_each(|(a, b)| *a += b);
                    }
                }
                s
            })
            .collect()
    }

    /// Total score of a label-index sequence.
    pub fn sequence_score(&self, words: &[&str], labels: &[usize]) -> f64 {
        let emit = self.emission_scores(words);
        let mut prev = self.start_row();
        let mut total = 0.0;
        for (i, &y) in labels.iter().enumerate() {
            total += emit[i][y] + self.transitions[prev][y];
            prev = y;
        }
        total
    }

    /// Best label-index sequence.
    pub fn decode_indices(&self, words: &[&str]) -> Vec<usize> {
        best_path(&self.emission_scores(words), &self.transitions)
    }

    pub fn tag_words(&self, words: &[&str]) -> TagSequence {
        TagSequence(
            self.decode_indices(words)
                .into_iter()
                .map(|y| self.labels[y].clone())
                .collect(),
        )
    }

    pub fn weights_finite(&self) -> bool {
        self.emissions.values().flatten().chain(self.transitions.iter().flatten()).all(|w| w.is_finite())
    }
}

/// Highest-scoring tag sequence for a sentence.
pub fn tag_bio(model: &LinearTaggerModel, sentence: &Sentence) -> TagSequence {
    let words: Vec<&str> = sentence.tokens.iter().map(|t| t.text.as_str()).collect();
    model.tag_words(&words)
}

/// One training record: tokens with gold BIO tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedTokens {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
}

impl TaggedTokens {
    pub fn from_sentence(sentence: &Sentence, tags: &TagSequence) -> Self {
        TaggedTokens {
            tokens: sentence.tokens.iter().map(|t| t.text.clone()).collect(),
            tags: tags.0.clone(),
        }
    }
}

/// Train on `(sentence, gold tags)` pairs.
pub fn train_sequence_tagger(
    annotated: &[(Sentence, TagSequence)],
    epochs: usize,
    seed: u64,
) -> Result<LinearTaggerModel, ExtractionError> {
    let records: Vec<TaggedTokens> = annotated
        .iter()
        .map(|(s, t)| TaggedTokens::from_sentence(s, t))
        .collect();
    train_on_tokens(&records, epochs, seed)
}

struct Prepared {
    features: Vec<Vec<usize>>,
    gold: Vec<usize>,
}

/// Averaged perceptron training. Examples are visited in a seeded shuffled
/// order each epoch; training stops early after an epoch without mistakes.
pub fn train_on_tokens(
    records: &[TaggedTokens],
    epochs: usize,
    seed: u64,
) -> Result<LinearTaggerModel, ExtractionError> {
    if records.is_empty() {
        return Err(ExtractionError::EmptyTrainingSet);
    }
    let mut label_set = BTreeSet::new();
    for (k, r) in records.iter().enumerate() {
        if r.tokens.len() != r.tags.len() {
            return Err(ExtractionError::Misaligned {
                record: k,
                tokens: r.tokens.len(),
                tags: r.tags.len(),
            });
        }
        if let Some(bad) = r.tags.iter().find(|t| !is_valid_label(t)) {
            return Err(ExtractionError::InvalidLabel(bad.clone()));
        }
        label_set.extend(r.tags.iter().cloned());
    }
    let labels: Vec<String> = label_set.into_iter().collect();
    let mut model = LinearTaggerModel::zeros(&labels);
    let n = model.num_labels();
    let start = model.start_row();

    let mut feature_ids: HashMap<String, usize> = HashMap::new();
    let mut feature_names: Vec<String> = Vec::new();
    let prepared: Vec<Prepared> = records
        .iter()
        .map(|r| {
            let words: Vec<&str> = r.tokens.iter().map(String::as_str).collect();
            let features = (0..words.len())
                .map(|i| {
                    token_features(&words, i)
                        .into_iter()
                        .map(|f| {
                            *feature_ids.entry(f.clone()).or_insert_with(|| {
                                feature_names.push(f);
                                feature_names.len() - 1
                            })
                        })
                        .collect()
                })
                .collect();
            let gold = r.tags.iter().map(|t| model.label_index(t).unwrap()).collect();
            Prepared { features, gold }
        })
        .collect();

    let nf = feature_names.len();
    let mut emit = vec![vec![0.0; n]; nf];
    let mut emit_acc = vec![vec![0.0; n]; nf];
    let mut trans = vec![vec![0.0; n]; n + 1];
    let mut trans_acc = vec![vec![0.0; n]; n + 1];
    let mut step = 1.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..prepared.len()).collect();

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0usize;
        for &k in &order {
            let ex = &prepared[k];
            let scores: Vec<Vec<f64>> = ex
                .features
                .iter()
                .map(|fs| {
                    let mut s = vec![0.0; n];
                    for &f in fs {
                        s.iter_mut().zip(&emit[f]).for_each(|(a, b)| *a += b);
                    }
                    s
                })
                .collect();
            // decode with the current, non-averaged weights
            let pred = best_path(&scores, &trans);
            if pred != ex.gold {
                mistakes += 1;
                for i in 0..ex.gold.len() {
                    let (g, p) = (ex.gold[i], pred[i]);
                    if g != p {
                        for &f in &ex.features[i] {
                            emit[f][g] += 1.0;
                            emit[f][p] -= 1.0;
                            emit_acc[f][g] += step;
                            emit_acc[f][p] -= step;
                        }
                    }
                    let gp = if i == 0 { start } else { ex.gold[i - 1] };
                    let pp = if i == 0 { start } else { pred[i - 1] };
                    if (gp, g) != (pp, p) {
                        trans[gp][g] += 1.0;
                        trans[pp][p] -= 1.0;
                        trans_acc[gp][g] += step;
                        trans_acc[pp][p] -= step;
                    }
                }
            }
            step += 1.0;
        }
        if mistakes == 0 {
            break;
        }
    }

    let average = |w: &f64, acc: &f64| w - acc / step;
    model.transitions = trans
        .iter()
        .zip(&trans_acc)
        .map(|(w, a)| w.iter().zip(a).map(|(w, a)| average(w, a)).collect())
        .collect();
    model.emissions = feature_names
        .into_iter()
        .enumerate()
        .filter_map(|(f, name)| {
            let row: Vec<f64> = emit[f].iter().zip(&emit_acc[f]).map(|(w, a)| average(w, a)).collect();
            row.iter().any(|w| *w != 0.0).then_some((name, row))
        })
        .collect();
    Ok(model)
}

/// Exact decoding over per-position label scores. `transitions` has one row
/// per label plus a final start row. Runs the recursion right to left so the
/// forward pass can pick the smallest label among ties at each position.
fn best_path(emit: &[Vec<f64>], transitions: &[Vec<f64>]) -> Vec<usize> {
    let len = emit.len();
    if len == 0 {
        return Vec::new();
    }
    let n = transitions[0].len();
    // best[i][y]: best score of positions i.. given y_i = y
    let mut best = vec![vec![0.0; n]; len];
    best[len - 1].clone_from(&emit[len - 1]);
    for i in (0..len - 1).rev() {
        for y in 0..n {
            let tail = (0..n)
                .map(|z| transitions[y][z] + best[i + 1][z])
                .fold(f64::NEG_INFINITY, f64::max);
            best[i][y] = emit[i][y] + tail;
        }
    }
    let mut out = Vec::with_capacity(len);
    let mut prev = n;
    for row in &best {
        let mut pick = 0;
        let mut pick_score = f64::NEG_INFINITY;
        for (y, b) in row.iter().enumerate() {
            let s = transitions[prev][y] + b;
            if s > pick_score {
                pick = y;
                pick_score = s;
            }
        }
        out.push(pick);
        prev = pick;
    }
    out
}

/// Fraction of records whose full tag sequence the model reproduces.
pub fn sequence_accuracy(model: &LinearTaggerModel, records: &[TaggedTokens]) -> f64 {
    if records.is_empty() {
        return 1.0;
    }
    let correct = records
        .iter()
        .filter(|r| {
            let words: Vec<&str> = r.tokens.iter().map(String::as_str).collect();
            model.tag_words(&words).0 == r.tags
        })
        .count();
    correct as f64 / records.len() as f64
}
