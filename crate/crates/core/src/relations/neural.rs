//! Pooled-pair relation classifier.
//!
//! Each event span is average-pooled over per-token vectors; the pair is
//! represented as `(v1, v2, |v1 - v2|)` and scored by one linear layer with a
//! softmax over [`ClassLabel::ORDER`].

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matcher::match_patterns;
use super::pattern::Pattern;
use super::propositions::propositions_for;
use super::{Evidence, Extractor, RelationError, RelationMention, RelationSubtype};
use crate::corpus::{Document, Sentence, Span};
use crate::extraction::EventMention;
use crate::vectors::TokenEncoder;

pub fn mention_pool(vectors: &[Vec<f64>], span: Span) -> Result<Vec<f64>, RelationError> {
    if span.is_empty() {
        return Err(RelationError::EmptySpan);
    }
    if span.end > vectors.len() {
        return Err(RelationError::SpanOutOfRange {
            start: span.start,
            end: span.end,
            len: vectors.len(),
        });
    }
    let dim = vectors[span.start].len();
    let mut out = vec![0.0; dim];
    for v in &vectors[span.start..span.end] {
        if v.len() != dim {
            return Err(RelationError::DimensionMismatch { left: dim, right: v.len() });
        }
        out.iter_mut().zip(v).for_each(|(o, x)| *o += x);
    }
    let n = span.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRepresentation {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    /// `v1`, then `v2`, then the element-wise `|v1 - v2|`.
    pub v: Vec<f64>,
}

pub fn pair_representation(v1: &[f64], v2: &[f64]) -> Result<PairRepresentation, RelationError> {
    if v1.len() != v2.len() {
        return Err(RelationError::DimensionMismatch {
            left: v1.len(),
            right: v2.len(),
        });
    }
    let mut v = Vec::with_capacity(3 * v1.len());
    v.extend_from_slice(v1);
    v.extend_from_slice(v2);
    v.extend(v1.iter().zip(v2).map(|(a, b)| (a - b).abs()));
    Ok(PairRepresentation {
        v1: v1.to_vec(),
        v2: v2.to_vec(),
        v,
    })
}

/// Classifier output: no relation, or one of the six subtypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    NoRelation,
    Relation(RelationSubtype),
}

impl ClassLabel {
    /// Row order of the classifier; argmax ties go to the earlier label.
    pub const ORDER: [ClassLabel; 7] = [
        ClassLabel::NoRelation,
        ClassLabel::Relation(RelationSubtype::Cause),
        ClassLabel::Relation(RelationSubtype::Catalyst),
        ClassLabel::Relation(RelationSubtype::Precondition),
        ClassLabel::Relation(RelationSubtype::Mitigation),
        ClassLabel::Relation(RelationSubtype::Preventative),
        ClassLabel::Relation(RelationSubtype::BeforeAfter),
    ];

    pub fn index(self) -> usize {
        ClassLabel::ORDER.iter().position(|l| *l == self).unwrap_or(0)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::NoRelation => f.write_str("NoRelation"),
            ClassLabel::Relation(s) => f.write_str(s.as_str()),
        }
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "NoRelation" {
            Ok(ClassLabel::NoRelation)
        } else {
            s.parse().map(ClassLabel::Relation)
        }
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Linear layer over pair representations: one weight row and one bias per
/// label in [`ClassLabel::ORDER`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationClassifier {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl RelationClassifier {
    pub fn zeros(input_dim: usize) -> Self {
        RelationClassifier {
            weights: vec![vec![0.0; input_dim]; ClassLabel::ORDER.len()],
            bias: vec![0.0; ClassLabel::ORDER.len()],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn is_finite(&self) -> bool {
        self.bias.iter().chain(self.weights.iter().flatten()).all(|w| w.is_finite())
    }

    pub fn scores(&self, v: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(v).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }

    pub fn probabilities(&self, v: &[f64]) -> Vec<f64> {
        softmax(&self.scores(v))
    }
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

/// Argmax label and its probability.
pub fn classify_pair(classifier: &RelationClassifier, rep: &PairRepresentation) -> (ClassLabel, f64) {
    let probs = classifier.probabilities(&rep.v);
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    (ClassLabel::ORDER[best], probs[best])
}

/// Plain SGD on softmax cross-entropy, visiting examples in a seeded
/// shuffled order each epoch.
pub fn train_relation_classifier(
    examples: &[(Vec<f64>, ClassLabel)],
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<RelationClassifier, RelationError> {
    let dim = examples.first().ok_or(RelationError::EmptyTrainingSet)?.0.len();
    if let Some((_, (v, _))) = examples.iter().enumerate().find(|(_, (v, _))| v.len() != dim) {
        return Err(RelationError::DimensionMismatch { left: dim, right: v.len() });
    }
    let mut model = RelationClassifier::zeros(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (v, label) = &examples[i];
            let probs = model.probabilities(v);
            let gold = label.index();
            for (k, p) in probs.iter().enumerate() {
                let g = p - if k == gold { 1.0 } else { 0.0 };
                model.bias[k] -= learning_rate * g;
                model.weights[k].iter_mut().zip(v).for_each(|(w, x)| *w -= learning_rate * g * x);
            }
        }
    }
    Ok(model)
}

/// Relation training record: a tokenized sentence, the X and Y event spans
/// and the gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationExample {
    pub tokens: Vec<String>,
    pub left: Span,
    pub right: Span,
    pub label: ClassLabel,
}

impl RelationExample {
    pub fn features(&self, encoder: &dyn TokenEncoder) -> Result<Vec<f64>, RelationError> {
        let words: Vec<&str> = self.tokens.iter().map(String::as_str).collect();
        pair_features(encoder, &words, self.left, self.right)
    }
}

fn pair_features(encoder: &dyn TokenEncoder, words: &[&str], left: Span, right: Span) -> Result<Vec<f64>, RelationError> {
    let vectors = encoder.encode(words);
    let v1 = mention_pool(&vectors, left)?;
    let v2 = mention_pool(&vectors, right)?;
    Ok(pair_representation(&v1, &v2)?.v)
}

pub fn featurize_examples(
    examples: &[RelationExample],
    encoder: &dyn TokenEncoder,
) -> Result<Vec<(Vec<f64>, ClassLabel)>, RelationError> {
    examples
        .iter()
        .enumerate()
        .map(|(k, e)| {
            if e.left.overlaps(&e.right) {
                return Err(RelationError::BadExample(k));
            }
            Ok((e.features(encoder).map_err(|_| RelationError::BadExample(k))?, e.label))
        })
        .collect()
}

/// Label every ordered pair of distinct, non-overlapping mentions of each
/// sentence with the subtype the patterns assign, or `NoRelation`.
pub fn generate_examples(docs: &[Document], mentions: &[EventMention], patterns: &[Pattern]) -> Vec<RelationExample> {
    let mut out = Vec::new();
    for doc in docs {
        for s in &doc.sentences {
            let events: Vec<EventMention> = mentions
                .iter()
                .filter(|m| m.doc_id == doc.id && m.sentence_index == s.index)
                .cloned()
                .collect();
            if events.len() < 2 {
                continue;
            }
            let rels = match_patterns(doc, s, &events, patterns, &propositions_for(doc, s));
            let tokens: Vec<String> = s.tokens.iter().map(|t| t.text.clone()).collect();
            for a in &events {
                for b in &events {
                    if a.id == b.id || a.trigger_span.overlaps(&b.trigger_span) {
                        continue;
                    }
                    let label = rels
                        .iter()
                        .find(|r| r.left_event == a.id && r.right_event == b.id)
                        .map_or(ClassLabel::NoRelation, |r| ClassLabel::Relation(r.subtype));
                    out.push(RelationExample {
                        tokens: tokens.clone(),
                        left: a.trigger_span,
                        right: b.trigger_span,
                        label,
                    });
                }
            }
        }
    }
    out
}

/// Classifies every ordered mention pair of a sentence.
pub struct NeuralRelationExtractor<'a> {
    pub classifier: &'a RelationClassifier,
    pub encoder: &'a dyn TokenEncoder,
    /// Pairs whose winning probability is below this are dropped.
    pub min_confidence: f64,
}

impl NeuralRelationExtractor<'_> {
    pub fn extract(&self, doc: &Document, sentence: &Sentence, events: &[EventMention]) -> Vec<RelationMention> {
        let events: Vec<&EventMention> = events
            .iter()
            .filter(|e| e.doc_id == doc.id && e.sentence_index == sentence.index && e.trigger_span.end <= sentence.len())
            .collect();
        if events.len() < 2 {
            return Vec::new();
        }
        let words: Vec<&str> = sentence.tokens.iter().map(|t| t.text.as_str()).collect();
        let vectors = self.encoder.encode(&words);
        let mut out = Vec::new();
        for a in &events {
            for b in &events {
                if a.id == b.id || a.trigger_span.overlaps(&b.trigger_span) {
                    continue;
                }
                let (Ok(v1), Ok(v2)) = (mention_pool(&vectors, a.trigger_span), mention_pool(&vectors, b.trigger_span)) else {
                    continue;
                };
                let Ok(rep) = pair_representation(&v1, &v2) else { continue };
                if let (ClassLabel::Relation(subtype), p) = classify_pair(self.classifier, &rep) {
                    if p >= self.min_confidence {
                        out.push(RelationMention::new(
                            a,
                            b,
                            subtype,
                            Evidence::new(doc, sentence),
                            Extractor::Neural,
                            p,
                        ));
                    }
                }
            }
        }
        out.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));
        out
    }
}
