//! Rule-based resolution of time arguments to months and location
//! arguments to canonical geolocation ids.

use std::collections::BTreeMap;

use super::lexicon::phrase_tokens;
use super::ExtractionError;
use crate::month::YearMonth;

const MONTH_NAMES: [(&str, u8); 24] = [
    ("january", 1),
    ("jan", 1),
    ("february", 2),
    ("feb", 2),
    ("march", 3),
    ("mar", 3),
    ("april", 4),
    ("apr", 4),
    ("may", 5),
    ("june", 6),
    ("jun", 6),
    ("july", 7),
    ("jul", 7),
    ("august", 8),
    ("aug", 8),
    ("september", 9),
    ("sep", 9),
    ("sept", 9),
    ("october", 10),
    ("oct", 10),
    ("november", 11),
    ("nov", 11),
    ("december", 12),
    ("dec", 12),
];

const CURRENT: &[&[&str]] = &[
    &["today"],
    &["now"],
    &["currently"],
    &["yesterday"],
    &["tonight"],
    &["this", "week"],
    &["this", "month"],
    &["this", "weekend"],
    &["last", "week"],
];
const PREVIOUS: &[&[&str]] = &[&["last", "month"], &["previous", "month"], &["past", "month"]];
const NEXT: &[&[&str]] = &[&["next", "month"], &["coming", "month"]];

fn month_number(word: &str) -> Option<u8> {
    MONTH_NAMES.iter().find(|(n, _)| *n == word).map(|&(_, m)| m)
}

fn contains_phrase(words: &[String], phrases: &[&[&str]]) -> bool {
    phrases
        .iter()
        .any(|p| words.windows(p.len()).any(|w| w.iter().zip(p.iter()).all(|(a, b)| a == b)))
}

/// Resolve a time expression to a month, relative to the document month.
///
/// Rules, first match wins:
/// * an ISO `YYYY-MM` or `YYYY-MM-DD` token gives that month;
/// * a month name with a four-digit year gives that month;
/// * a month name alone gives that month in the document's year, or in the
///   previous year when it would fall after the document month;
/// * `last month` / `next month` shift the document month by one;
/// * `today`, `now`, `this week` and similar give the document month.
pub fn resolve_time_to_month(arg_text: &str, doc_month: YearMonth) -> Option<YearMonth> {
    let words = phrase_tokens(arg_text);
    for w in &words {
        if w.len() >= 7 && w.as_bytes()[4] == b'-' {
            if let Ok(m) = YearMonth::from_iso_date(w) {
                return Some(m);
            }
        }
    }
    if let Some(month) = words.iter().find_map(|w| month_number(w)) {
        let year = words
            .iter()
            .filter(|w| w.len() == 4 && w.bytes().all(|b| b.is_ascii_digit()))
            .filter_map(|w| w.parse::<i32>().ok())
            .find(|y| (1900..=2100).contains(y));
        return match year {
            Some(y) => YearMonth::new(y, month),
            None if month <= doc_month.month() => YearMonth::new(doc_month.year(), month),
            None => YearMonth::new(doc_month.year() - 1, month),
        };
    }
    if contains_phrase(&words, PREVIOUS) {
        return Some(doc_month.pred());
    }
    if contains_phrase(&words, NEXT) {
        return Some(doc_month.succ());
    }
    if contains_phrase(&words, CURRENT) {
        return Some(doc_month);
    }
    None
}

/// Location aliases (lowercased token sequences) mapped to canonical ids
/// such as `US-CA` or `IT`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    aliases: BTreeMap<Vec<String>, String>,
    max_len: usize,
}

impl Gazetteer {
    /// Parse `id<TAB>alias` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, ExtractionError> {
        let mut g = Gazetteer::default();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (id, alias) = line.split_once('\t').ok_or_else(|| ExtractionError::BadLine {
                line: n + 1,
                reason: "expected `id<TAB>alias`".into(),
            })?;
            let toks = phrase_tokens(alias);
            if id.trim().is_empty() || toks.is_empty() {
                return Err(ExtractionError::BadLine {
                    line: n + 1,
                    reason: "empty id or alias".into(),
                });
            }
            g.max_len = g.max_len.max(toks.len());
            g.aliases.insert(toks, id.trim().to_string());
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    /// Canonical ids known to the gazetteer.
    pub fn ids(&self) -> std::collections::BTreeSet<&str> {
        self.aliases.values().map(String::as_str).collect()
    }

    /// Case-insensitive longest alias match anywhere in `arg_text`; among
    /// equally long matches the leftmost wins.
    pub fn resolve(&self, arg_text: &str) -> Option<&str> {
        let words = phrase_tokens(arg_text);
        for len in (1..=self.max_len.min(words.len())).rev() {
            for w in words.windows(len) {
                if let Some(id) = self.aliases.get(w) {
                    return Some(id);
                }
            }
        }
        None
    }
}

pub fn resolve_location(arg_text: &str, gazetteer: &Gazetteer) -> Option<String> {
    gazetteer.resolve(arg_text).map(str::to_string)
}
