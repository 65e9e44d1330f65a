//! Two-stage event extraction: trigger classification by BIO tagging, then
//! Place/Time argument extraction per trigger with month and geolocation
//! resolution.

pub mod arguments;
pub mod bio;
pub mod lexicon;
pub mod resolve;
pub mod tagger;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, Sentence, Span};
use crate::month::YearMonth;
use crate::taxonomy::Taxonomy;

pub use arguments::{
    extract_arguments, mark_trigger, train_argument_model, ArgumentMention, ArgumentRecord, ArgumentRole,
    TRIGGER_CLOSE, TRIGGER_OPEN,
};
pub use bio::{decode_bio_spans, encode_bio_spans, TagSequence};
pub use lexicon::TriggerLexicon;
pub use resolve::{resolve_location, resolve_time_to_month, Gazetteer};
pub use tagger::{tag_bio, train_on_tokens, train_sequence_tagger, LinearTaggerModel, TaggedTokens};

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("record {record}: {tokens} tokens but {tags} tags")]
    Misaligned { record: usize, tokens: usize, tags: usize },
    #[error("invalid BIO label `{0}`")]
    InvalidLabel(String),
    #[error("record {0}: trigger span outside the sentence")]
    TriggerOutOfRange(usize),
    #[error("unknown event type `{0}`")]
    UnknownEventType(String),
    #[error("empty trigger phrase")]
    EmptyPhrase,
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("invalid record: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMention {
    pub id: String,
    pub doc_id: String,
    pub sentence_index: usize,
    pub trigger_span: Span,
    pub trigger_text: String,
    pub event_type: String,
    pub location_arg: Option<ArgumentMention>,
    pub time_arg: Option<ArgumentMention>,
    pub geo: Option<String>,
    pub month: Option<YearMonth>,
    /// True when `month` was taken from the document date rather than a time argument.
    #[serde(default)]
    pub month_inherited: bool,
}

impl EventMention {
    pub fn make_id(doc_id: &str, sentence_index: usize, span: Span) -> String {
        format!("{doc_id}#s{sentence_index}:{}-{}", span.start, span.end)
    }
}

/// Stage one: label every token of a sentence with a BIO event-type tag.
pub trait EventTagger: Send + Sync {
    fn tag(&self, sentence: &Sentence) -> TagSequence;
}

impl EventTagger for TriggerLexicon {
    fn tag(&self, sentence: &Sentence) -> TagSequence {
        TriggerLexicon::tag(self, sentence)
    }
}

impl EventTagger for LinearTaggerModel {
    fn tag(&self, sentence: &Sentence) -> TagSequence {
        tag_bio(self, sentence)
    }
}

/// Mentions for every lexicon match in one sentence, without arguments.
pub fn lexicon_tag_events(doc_id: &str, sentence: &Sentence, lexicon: &TriggerLexicon) -> Vec<EventMention> {
    lexicon
        .match_spans(sentence)
        .into_iter()
        .map(|(span, ty)| EventMention {
            id: EventMention::make_id(doc_id, sentence.index, span),
            doc_id: doc_id.to_string(),
            sentence_index: sentence.index,
            trigger_span: span,
            trigger_text: sentence.tokens[span.start..span.end]
                .iter()
                .map(|t| t.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            event_type: ty,
            location_arg: None,
            time_arg: None,
            geo: None,
            month: None,
            month_inherited: false,
        })
        .collect()
}

/// Runs both stages over a document.
pub struct EventExtractor<'a> {
    pub tagger: &'a dyn EventTagger,
    pub argument_model: Option<&'a LinearTaggerModel>,
    pub gazetteer: &'a Gazetteer,
    pub taxonomy: &'a Taxonomy,
    /// Give argument-less mentions (or ones whose time did not resolve) the
    /// document's publication month.
    pub inherit_month: bool,
}

impl EventExtractor<'_> {
    pub fn extract_sentence(&self, doc: &Document, sentence: &Sentence) -> Vec<EventMention> {
        let tags = self.tagger.tag(sentence);
        let mut out = Vec::new();
        // arguments are only ever looked up for triggers found by the tagger
        for (span, ty) in decode_bio_spans(tags.as_slice()) {
            if !self.taxonomy.contains(&ty) || span.end > sentence.len() {
                continue;
            }
            let args = match self.argument_model {
                Some(model) => extract_arguments(model, sentence, span),
                None => Vec::new(),
            };
            let pick = |role: ArgumentRole| {
                args.iter().find(|a| a.role == role).map(|a| ArgumentMention {
                    role,
                    span: a.span,
                    text: doc.span_text(sentence, a.span).to_string(),
                })
            };
            let location_arg = pick(ArgumentRole::Place);
            let time_arg = pick(ArgumentRole::Time);
            let geo = location_arg
                .as_ref()
                .and_then(|a| resolve_location(&a.text, self.gazetteer));
            let resolved = time_arg
                .as_ref()
                .and_then(|a| resolve_time_to_month(&a.text, doc.published_month));
            let (month, month_inherited) = match resolved {
                Some(m) => (Some(m), false),
                None if self.inherit_month => (Some(doc.published_month), true),
                None => (None, false),
            };
            out.push(EventMention {
                id: EventMention::make_id(&doc.id, sentence.index, span),
                doc_id: doc.id.clone(),
                sentence_index: sentence.index,
                trigger_span: span,
                trigger_text: doc.span_text(sentence, span).to_string(),
                event_type: ty,
                location_arg,
                time_arg,
                geo,
                month,
                month_inherited,
            });
        }
        out
    }

    /// Mentions of a segmented document, ordered by sentence then span start.
    pub fn extract_document(&self, doc: &Document) -> Vec<EventMention> {
        doc.sentences
            .iter()
            .flat_map(|s| self.extract_sentence(doc, s))
            .collect()
    }
}

/// Read JSONL records, skipping blank lines.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>, ExtractionError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(ExtractionError::from))
        .collect()
}
