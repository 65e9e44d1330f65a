//! Corpus ingestion, sentence/token segmentation and monthly volume statistics.

mod ingest;
mod segment;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::month::{MonthRange, YearMonth};
use crate::relations::Proposition;

pub use ingest::{ingest_documents, IngestReport, MAX_MALFORMED_FRACTION};
pub use segment::{is_abbreviation, segment_document, segment_text, tokenize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read input stream: {0}")]
    Io(#[from] std::io::Error),
    #[error("{malformed} of {total} input lines are malformed (first problem: {first})")]
    TooManyMalformed {
        malformed: usize,
        total: usize,
        first: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    News,
    Scholarly,
}

/// Half-open `[start, end)` range. Used both for byte offsets into a document
/// body and for token indices within a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains_span(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Byte offsets into the document body.
    pub char_span: Span,
    pub lowercase: String,
}

impl Token {
    pub fn new(text: &str, char_span: Span) -> Self {
        Token {
            text: text.to_string(),
            char_span,
            lowercase: text.to_lowercase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub tokens: Vec<Token>,
    pub char_span: Span,
}

impl Sentence {
    /// Build a sentence from bare token strings, laying them out separated by
    /// single spaces. Handy for training records and tests that have no body.
    pub fn from_words<S: AsRef<str>>(index: usize, words: &[S]) -> Self {
        let mut tokens = Vec::with_capacity(words.len());
        let mut pos = 0;
        for w in words {
            let w = w.as_ref();
            tokens.push(Token::new(w, Span::new(pos, pos + w.len())));
            pos += w.len() + 1;
        }
        let end = tokens.last().map_or(0, |t| t.char_span.end);
        Sentence {
            index,
            tokens,
            char_span: Span::new(0, end),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lowercase_tokens(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.lowercase.as_str()).collect()
    }

    /// Byte span in the body covered by a token span.
    pub fn token_char_span(&self, span: Span) -> Span {
        Span::new(
            self.tokens[span.start].char_span.start,
            self.tokens[span.end - 1].char_span.end,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub kind: DocumentKind,
    pub source: String,
    pub published_month: YearMonth,
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub sentences: Vec<Sentence>,
    /// Predicate-argument triples supplied with the input. When present the
    /// heuristic proposition extractor is skipped for this document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propositions: Option<Vec<Proposition>>,
}

impl Document {
    pub fn in_range(&self, range: &MonthRange) -> bool {
        range.contains(self.published_month)
    }

    /// Body text covered by a token span of one sentence.
    pub fn span_text(&self, sentence: &Sentence, span: Span) -> &str {
        let cs = sentence.token_char_span(span);
        &self.body[cs.start..cs.end]
    }

    pub fn sentence_text(&self, sentence: &Sentence) -> &str {
        &self.body[sentence.char_span.start..sentence.char_span.end]
    }
}

/// Number of published articles per month.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub articles_per_month: BTreeMap<YearMonth, u64>,
}

impl CorpusStats {
    pub fn articles(&self, month: YearMonth) -> u64 {
        self.articles_per_month.get(&month).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.articles_per_month.values().sum()
    }

    /// First through last month with any articles.
    pub fn month_range(&self) -> Option<MonthRange> {
        let first = *self.articles_per_month.keys().next()?;
        let last = *self.articles_per_month.keys().next_back()?;
        Some(MonthRange::new(first, last))
    }
}

pub fn monthly_article_counts(docs: &[Document]) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for d in docs {
        *stats.articles_per_month.entry(d.published_month).or_default() += 1;
    }
    stats
}
