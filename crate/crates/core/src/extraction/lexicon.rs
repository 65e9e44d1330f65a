use std::collections::BTreeMap;

use super::bio::{encode_bio_spans, TagSequence};
use super::ExtractionError;
use crate::corpus::{tokenize, Sentence, Span};
use crate::taxonomy::Taxonomy;

/// Trigger phrases (lowercased token sequences) mapped to event types.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriggerLexicon {
    pub entries: BTreeMap<Vec<String>, String>,
    max_len: usize,
}

pub(crate) fn phrase_tokens(phrase: &str) -> Vec<String> {
    tokenize(phrase)
        .iter()
        .map(|s| phrase[s.start..s.end].to_lowercase())
        .collect()
}

impl TriggerLexicon {
    pub fn insert(&mut self, phrase: &str, event_type: &str) -> Result<(), ExtractionError> {
        let toks = phrase_tokens(phrase);
        if toks.is_empty() {
            return Err(ExtractionError::EmptyPhrase);
        }
        self.max_len = self.max_len.max(toks.len());
        self.entries.insert(toks, event_type.to_string());
        Ok(())
    }

    /// Parse `phrase<TAB>type` lines; `#` starts a comment line. Every type
    /// must exist in the taxonomy.
    pub fn parse(text: &str, taxonomy: &Taxonomy) -> Result<Self, ExtractionError> {
        let mut lex = TriggerLexicon::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (phrase, ty) = line.split_once('\t').ok_or_else(|| ExtractionError::BadLine {
                line: n + 1,
                reason: "expected `phrase<TAB>type`".into(),
            })?;
            let ty = ty.trim();
            if !taxonomy.contains(ty) {
                return Err(ExtractionError::UnknownEventType(ty.to_string()));
            }
            lex.insert(phrase, ty).map_err(|_| ExtractionError::BadLine {
                line: n + 1,
                reason: "empty trigger phrase".into(),
            })?;
        }
        Ok(lex)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest-match, left-to-right, non-overlapping phrase matches.
    pub fn match_spans(&self, sentence: &Sentence) -> Vec<(Span, String)> {
        let words = sentence.lowercase_tokens();
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let longest = (1..=self.max_len.min(words.len() - i)).rev().find_map(|len| {
                let key: Vec<String> = words[i..i + len].iter().map(|w| w.to_string()).collect();
                self.entries.get(&key).map(|ty| (len, ty))
            });
            match longest {
                Some((len, ty)) => {
                    out.push((Span::new(i, i + len), ty.clone()));
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    pub fn tag(&self, sentence: &Sentence) -> TagSequence {
        encode_bio_spans(sentence.len(), &self.match_spans(sentence))
    }
}
