//! Place/Time argument extraction relative to an already-classified trigger.
//!
//! The trigger is wrapped in two reserved marker tokens before tagging, and
//! decoded argument spans are mapped back to unmarked token indices.

use serde::{Deserialize, Serialize};

use super::bio::decode_bio_spans;
use super::tagger::{train_on_tokens, LinearTaggerModel, TaggedTokens};
use super::ExtractionError;
use crate::corpus::{Sentence, Span};

pub const TRIGGER_OPEN: &str = "<t>";
pub const TRIGGER_CLOSE: &str = "</t>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArgumentRole {
    Place,
    Time,
}

impl ArgumentRole {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Place" => Some(ArgumentRole::Place),
            "Time" => Some(ArgumentRole::Time),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentMention {
    pub role: ArgumentRole,
    pub span: Span,
    #[serde(default)]
    pub text: String,
}

/// Insert the two trigger markers around `trigger`.
pub fn mark_trigger<S: AsRef<str>>(words: &[S], trigger: Span) -> Vec<String> {
    let mut out = Vec::with_capacity(words.len() + 2);
    for (i, w) in words.iter().enumerate() {
        if i == trigger.start {
            out.push(TRIGGER_OPEN.to_string());
        }
        out.push(w.as_ref().to_string());
        if i + 1 == trigger.end {
            out.push(TRIGGER_CLOSE.to_string());
        }
    }
    out
}

/// Unmarked index of marked position `j`, or `None` for a marker.
fn unmark_index(j: usize, trigger: Span) -> Option<usize> {
    let open = trigger.start;
    let close = trigger.end + 1;
    if j < open {
        Some(j)
    } else if j == open || j == close {
        None
    } else if j < close {
        Some(j - 1)
    } else {
        Some(j - 2)
    }
}

/// Tag the marked sentence with the argument-role model and return Place/Time
/// spans in unmarked token coordinates.
pub fn extract_arguments(
    model: &LinearTaggerModel,
    sentence: &Sentence,
    trigger: Span,
) -> Vec<ArgumentMention> {
    let words: Vec<&str> = sentence.tokens.iter().map(|t| t.text.as_str()).collect();
    if trigger.is_empty() || trigger.end > words.len() {
        return Vec::new();
    }
    let marked = mark_trigger(&words, trigger);
    let marked_refs: Vec<&str> = marked.iter().map(String::as_str).collect();
    let tags = model.tag_words(&marked_refs);
    decode_bio_spans(tags.as_slice())
        .into_iter()
        .filter_map(|(span, ty)| {
            let role = ArgumentRole::parse(&ty)?;
            let idx: Vec<usize> = (span.start..span.end).filter_map(|j| unmark_index(j, trigger)).collect();
            let (first, last) = (*idx.first()?, *idx.last()?);
            Some(ArgumentMention {
                role,
                span: Span::new(first, last + 1),
                text: String::new(),
            })
        })
        .collect()
}

/// Argument training record: unmarked tokens, the trigger span and gold
/// Place/Time BIO tags aligned to the unmarked tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentRecord {
    pub tokens: Vec<String>,
    pub trigger: Span,
    pub tags: Vec<String>,
}

impl ArgumentRecord {
    pub fn marked(&self) -> TaggedTokens {
        let mut tags = Vec::with_capacity(self.tags.len() + 2);
        for (i, t) in self.tags.iter().enumerate() {
            if i == self.trigger.start {
                tags.push("O".to_string());
            }
            tags.push(t.clone());
            if i + 1 == self.trigger.end {
                tags.push("O".to_string());
            }
        }
        TaggedTokens {
            tokens: mark_trigger(&self.tokens, self.trigger),
            tags,
        }
    }
}

pub fn train_argument_model(
    records: &[ArgumentRecord],
    epochs: usize,
    seed: u64,
) -> Result<LinearTaggerModel, ExtractionError> {
    for (k, r) in records.iter().enumerate() {
        if r.tokens.len() != r.tags.len() {
            return Err(ExtractionError::Misaligned {
                record: k,
                tokens: r.tokens.len(),
                tags: r.tags.len(),
            });
        }
        if r.trigger.is_empty() || r.trigger.end > r.tokens.len() {
            return Err(ExtractionError::TriggerOutOfRange(k));
        }
    }
    let marked: Vec<TaggedTokens> = records.iter().map(ArgumentRecord::marked).collect();
    train_on_tokens(&marked, epochs, seed)
}
