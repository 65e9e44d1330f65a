//! Relation patterns.
//!
//! One pattern per line:
//!
//! ```text
//! lexical: X leads to Y => Cause
//! lexical: Y because of X => Cause
//! prop: cause[subject=X][object=Y] => Cause
//! prop: verb:cause[subject=Y][prep_by=X] => Cause
//! ```
//!
//! `X` is always the relation's left argument and `Y` its right argument. A
//! lexical template is a slot, one or more literal words, then the other
//! slot; the literal words must equal the tokens between the two event
//! mentions. A proposition pattern names a predicate lemma and the role each
//! slot fills. Blank lines and lines starting with `#` are ignored.

use serde::{Deserialize, Serialize};

use super::propositions::Role;
use super::subtype::RelationSubtype;
use super::RelationError;
use crate::extraction::lexicon::phrase_tokens;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternBody {
    Lexical {
        /// Lowercased literal tokens between the two slots.
        interior: Vec<String>,
        /// Whether X precedes Y in the surface template.
        x_first: bool,
    },
    Proposition {
        lemma: String,
        constraints: Vec<(Role, Slot)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub source: String,
    pub body: PatternBody,
    pub subtype: RelationSubtype,
}

impl Pattern {
    pub fn is_lexical(&self) -> bool {
        matches!(self.body, PatternBody::Lexical { .. })
    }
}

fn error(source: &str, reason: impl Into<String>) -> RelationError {
    RelationError::Pattern {
        pattern: source.to_string(),
        reason: reason.into(),
    }
}

fn slot(word: &str) -> Option<Slot> {
    match word {
        "X" => Some(Slot::X),
        "Y" => Some(Slot::Y),
        _ => None,
    }
}

pub fn compile_pattern(source: &str) -> Result<Pattern, RelationError> {
    let src = source.trim();
    let (head, subtype) = src
        .rsplit_once("=>")
        .ok_or_else(|| error(src, "missing `=> Subtype`"))?;
    let subtype: RelationSubtype = subtype.trim().parse().map_err(|e: String| error(src, e))?;
    let (kind, body) = head.split_once(':').ok_or_else(|| error(src, "missing pattern kind"))?;
    let body = body.trim();
    let body = match kind.trim() {
        "lexical" => compile_lexical(src, body)?,
        "prop" | "proposition" => compile_proposition(src, body)?,
        other => return Err(error(src, format!("unknown pattern kind `{other}`"))),
    };
    Ok(Pattern {
        source: src.to_string(),
        body,
        subtype,
    })
}

fn compile_lexical(src: &str, body: &str) -> Result<PatternBody, RelationError> {
    let words: Vec<&str> = body.split_whitespace().collect();
    let slots: Vec<(usize, Slot)> = words.iter().enumerate().filter_map(|(i, w)| slot(w).map(|s| (i, s))).collect();
    let xs = slots.iter().filter(|(_, s)| *s == Slot::X).count();
    let ys = slots.iter().filter(|(_, s)| *s == Slot::Y).count();
    if xs != 1 || ys != 1 {
        return Err(error(src, "lexical template needs exactly one X and one Y slot"));
    }
    if slots[0].0 != 0 || slots[1].0 != words.len() - 1 {
        return Err(error(src, "lexical template must start and end with a slot"));
    }
    let interior = phrase_tokens(&words[1..words.len() - 1].join(" "));
    if interior.is_empty() {
        return Err(error(src, "lexical template has no words between its slots"));
    }
    Ok(PatternBody::Lexical {
        interior,
        x_first: slots[0].1 == Slot::X,
    })
}

fn compile_proposition(src: &str, body: &str) -> Result<PatternBody, RelationError> {
    let body = body.strip_prefix("verb:").unwrap_or(body).trim();
    let open = body.find('[').ok_or_else(|| error(src, "proposition pattern has no role constraints"))?;
    let lemma = body[..open].trim().to_lowercase();
    if lemma.is_empty() || !lemma.chars().all(|c| c.is_alphabetic() || c == '_') {
        return Err(error(src, "invalid predicate lemma"));
    }
    let mut constraints = Vec::new();
    let mut rest = body[open..].trim();
    while !rest.is_empty() {
        let inner_end = rest
            .strip_prefix('[')
            .and_then(|r| r.find(']'))
            .ok_or_else(|| error(src, "unbalanced `[`"))?;
        let inner = &rest[1..=inner_end];
        let (role, value) = inner.split_once('=').ok_or_else(|| error(src, "constraint must be `role=slot`"))?;
        let role: Role = role.trim().parse().map_err(|e: String| error(src, e))?;
        let s = slot(value.trim()).ok_or_else(|| error(src, format!("constraint value `{}` is not X or Y", value.trim())))?;
        constraints.push((role, s));
        rest = rest[inner_end + 2..].trim_start();
    }
    let xs = constraints.iter().filter(|(_, s)| *s == Slot::X).count();
    let ys = constraints.iter().filter(|(_, s)| *s == Slot::Y).count();
    if xs != 1 || ys != 1 {
        return Err(error(src, "proposition pattern needs exactly one X and one Y slot"));
    }
    Ok(PatternBody::Proposition { lemma, constraints })
}

/// Compile every non-comment line of a pattern file.
pub fn load_patterns(text: &str) -> Result<Vec<Pattern>, RelationError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| {
            compile_pattern(l).map_err(|e| match e {
                RelationError::Pattern { pattern, reason } => RelationError::Pattern {
                    pattern,
                    reason: format!("line {}: {reason}", n + 1),
                },
                other => other,
            })
        })
        .collect()
}
