//! Begin-Inside-Outside tag sequences.

use serde::{Deserialize, Serialize};

use crate::corpus::Span;

pub const OUTSIDE: &str = "O";

/// One label per sentence token: `O`, `B-<type>` or `I-<type>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TagSequence(pub Vec<String>);

impl TagSequence {
    pub fn outside(len: usize) -> Self {
        TagSequence(vec![OUTSIDE.to_string(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BioLabel<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

/// Parse a label; anything not of the form `B-x`/`I-x` counts as outside.
pub fn parse_label(label: &str) -> BioLabel<'_> {
    match label.split_once('-') {
        Some(("B", ty)) if !ty.is_empty() => BioLabel::Begin(ty),
        Some(("I", ty)) if !ty.is_empty() => BioLabel::Inside(ty),
        _ => BioLabel::Outside,
    }
}

pub fn is_valid_label(label: &str) -> bool {
    label == OUTSIDE || parse_label(label) != BioLabel::Outside
}

/// Turn tags into typed spans. An `I-x` that does not continue a run of the
/// same type opens a new span, as if it were `B-x`.
pub fn decode_bio_spans(tags: &[String]) -> Vec<(Span, String)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, &str)> = None;
    for (i, tag) in tags.iter().enumerate() {
        match parse_label(tag) {
            BioLabel::Outside => {
                if let Some((start, ty)) = open.take() {
                    out.push((Span::new(start, i), ty.to_string()));
                }
            }
            BioLabel::Begin(ty) => {
                if let Some((start, prev)) = open.take() {
                    out.push((Span::new(start, i), prev.to_string()));
                }
                open = Some((i, ty));
            }
            BioLabel::Inside(ty) => match open {
                Some((_, prev)) if prev == ty => {}
                _ => {
                    if let Some((start, prev)) = open.take() {
                        out.push((Span::new(start, i), prev.to_string()));
                    }
                    open = Some((i, ty));
                }
            },
        }
    }
    if let Some((start, ty)) = open {
        out.push((Span::new(start, tags.len()), ty.to_string()));
    }
    out
}

/// Inverse of [`decode_bio_spans`] for non-overlapping, in-bounds spans.
pub fn encode_bio_spans(len: usize, spans: &[(Span, String)]) -> TagSequence {
    let mut tags = TagSequence::outside(len);
    for (span, ty) in spans {
        for i in span.start..span.end {
            let prefix = if i == span.start { "B" } else { "I" };
            tags.0[i] = format!("{prefix}-{ty}");
        }
    }
    tags
}
