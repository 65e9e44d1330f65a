//! Causal and temporal relations between event mentions of one sentence:
//! a pattern engine over token sequences and predicate-argument triples, a
//! pooled-pair linear classifier, and their union.

pub mod matcher;
pub mod neural;
pub mod pattern;
pub mod propositions;
pub mod subtype;
pub mod union;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, Sentence, Span};
use crate::extraction::EventMention;
use crate::month::YearMonth;

pub use matcher::match_patterns;
pub use neural::{
    classify_pair, featurize_examples, generate_examples, mention_pool, pair_representation, softmax,
    train_relation_classifier, ClassLabel, NeuralRelationExtractor, PairRepresentation, RelationClassifier,
    RelationExample,
};
pub use pattern::{compile_pattern, load_patterns, Pattern, PatternBody, Slot};
pub use propositions::{extract_svo_propositions, predicate_lemma, propositions_for, verb_lemma, Proposition, PropositionGraph, Role};
pub use subtype::{merge_subtype_to_type, RelationSubtype, RelationType};
pub use union::union_and_dedup;

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("pattern `{pattern}`: {reason}")]
    Pattern { pattern: String, reason: String },
    #[error("empty span")]
    EmptySpan,
    #[error("span {start}..{end} outside {len} vectors")]
    SpanOutOfRange { start: usize, end: usize, len: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("record {0}: invalid relation example")]
    BadExample(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extractor {
    Pattern,
    Neural,
}

/// The sentence a relation was read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub doc_id: String,
    pub published_month: YearMonth,
    pub sentence_index: usize,
    pub text: String,
    /// Byte span of the sentence in the document body.
    pub char_span: Span,
}

impl Evidence {
    pub fn new(doc: &Document, sentence: &Sentence) -> Self {
        Evidence {
            doc_id: doc.id.clone(),
            published_month: doc.published_month,
            sentence_index: sentence.index,
            text: doc.sentence_text(sentence).to_string(),
            char_span: sentence.char_span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationMention {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: RelationType,
    pub subtype: RelationSubtype,
    /// Mention id of the X argument.
    pub left_event: String,
    /// Mention id of the Y argument.
    pub right_event: String,
    pub left_type: String,
    pub right_type: String,
    pub left_span: Span,
    pub right_span: Span,
    pub evidence: Evidence,
    pub provenance: BTreeSet<Extractor>,
    pub confidence: f64,
}

impl RelationMention {
    pub fn new(
        left: &EventMention,
        right: &EventMention,
        subtype: RelationSubtype,
        evidence: Evidence,
        extractor: Extractor,
        confidence: f64,
    ) -> Self {
        let kind = merge_subtype_to_type(subtype);
        RelationMention {
            id: format!("{}>{}:{}", left.id, right.id, kind),
            kind,
            subtype,
            left_event: left.id.clone(),
            right_event: right.id.clone(),
            left_type: left.event_type.clone(),
            right_type: right.event_type.clone(),
            left_span: left.trigger_span,
            right_span: right.trigger_span,
            evidence,
            provenance: BTreeSet::from([extractor]),
            confidence,
        }
    }

    pub fn key(&self) -> (&str, &str, RelationType) {
        (&self.left_event, &self.right_event, self.kind)
    }

    /// Total order used for every relation listing.
    pub fn sort_key(&self) -> (&str, usize, Span, Span, RelationType) {
        (
            &self.evidence.doc_id,
            self.evidence.sentence_index,
            self.left_span,
            self.right_span,
            self.kind,
        )
    }
}
