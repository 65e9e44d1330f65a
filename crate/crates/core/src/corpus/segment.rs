//! Rule-based sentence and token segmentation.
//!
//! Tokens are maximal alphanumeric runs; `-`, `'`, `’` and `.` stay inside a
//! token only when flanked by alphanumerics on both sides (`COVID-19`, `U.S`,
//! `3.5`). Every other non-space character is a token of its own.
//!
//! A sentence ends after a `.`, `!` or `?` token that is followed by
//! whitespace and a token starting with an uppercase letter. A `.` glued to a
//! known abbreviation (`Dr.`, `U.S.`) never ends a sentence.

use super::{Document, Sentence, Span, Token};

const JOINERS: [char; 4] = ['-', '\'', '’', '.'];

const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "u.s", "u.k",
    "u.n", "no", "fig", "gen", "gov", "sen", "rep", "inc", "corp", "ltd", "co", "jan", "feb",
    "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "approx", "dept",
    "est", "al",
];

pub fn is_abbreviation(token: &str) -> bool {
    let lower = token.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Byte spans of the tokens of `text`.
pub fn tokenize(text: &str) -> Vec<Span> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_alphanumeric() {
            i += 1;
            loop {
                match chars.get(i) {
                    Some(&(_, ch)) if ch.is_alphanumeric() => i += 1,
                    Some(&(_, ch))
                        if JOINERS.contains(&ch)
                            && chars.get(i + 1).is_some_and(|&(_, n)| n.is_alphanumeric()) =>
                    {
                        i += 2
                    }
                    _ => break,
                }
            }
        } else {
            i += 1;
        }
        spans.push(Span::new(chars[start].0, end_of(i)));
    }
    spans
}

fn is_terminal(tok: &str) -> bool {
    matches!(tok, "." | "!" | "?")
}

/// Segment `text` into sentences of tokens; offsets refer to `text`.
pub fn segment_text(text: &str) -> Vec<Sentence> {
    let spans = tokenize(text);
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for (k, span) in spans.iter().enumerate() {
        let tok = &text[span.start..span.end];
        current.push(Token::new(tok, *span));
        let Some(next) = spans.get(k + 1) else { continue };
        if !is_terminal(tok) {
            continue;
        }
        let gap = &text[span.end..next.start];
        let next_upper = text[next.start..].chars().next().is_some_and(char::is_uppercase);
        if gap.is_empty() || !gap.chars().all(char::is_whitespace) || !next_upper {
            continue;
        }
        if tok == "." && k > 0 {
            let prev = spans[k - 1];
            if prev.end == span.start && is_abbreviation(&text[prev.start..prev.end]) {
                continue;
            }
        }
        sentences.push(close_sentence(sentences.len(), std::mem::take(&mut current)));
    }
    if !current.is_empty() {
        sentences.push(close_sentence(sentences.len(), current));
    }
    sentences
}

fn close_sentence(index: usize, tokens: Vec<Token>) -> Sentence {
    let char_span = Span::new(
        tokens.first().map_or(0, |t| t.char_span.start),
        tokens.last().map_or(0, |t| t.char_span.end),
    );
    Sentence {
        index,
        tokens,
        char_span,
    }
}

/// Populate `doc.sentences` from its body.
pub fn segment_document(mut doc: Document) -> Document {
    doc.sentences = segment_text(&doc.body);
    doc
}
