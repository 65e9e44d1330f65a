//! Predicate-argument triples for proposition patterns.
//!
//! Documents may supply their own triples; otherwise a subject-verb-object
//! heuristic over a fixed lexicon of causal and temporal verbs produces them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Document, Sentence, Span};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Subject,
    Object,
    /// Object of a preposition attached to the predicate, e.g. `prep_to`.
    Prep(String),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Subject => f.write_str("subject"),
            Role::Object => f.write_str("object"),
            Role::Prep(p) => write!(f, "prep_{p}"),
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subject" => Ok(Role::Subject),
            "object" => Ok(Role::Object),
            _ => match s.strip_prefix("prep_") {
                Some(p) if !p.is_empty() && p.chars().all(|c| c.is_ascii_lowercase()) => Ok(Role::Prep(p.to_string())),
                _ => Err(format!("unknown role `{s}`")),
            },
        }
    }
}

impl Serialize for Role {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Role {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One (predicate, role, argument) triple; spans are token indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Proposition {
    pub sentence: usize,
    pub predicate: Span,
    pub role: Role,
    pub argument: Span,
}

/// Triples of one sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropositionGraph {
    pub propositions: Vec<Proposition>,
}

impl PropositionGraph {
    pub fn is_empty(&self) -> bool {
        self.propositions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.propositions.len()
    }
}

const VERBS: &[&str] = &[
    "accelerate", "affect", "aggravate", "alleviate", "amplify", "avert", "begin", "block", "boost", "bring",
    "cause", "combat", "contain", "contribute", "create", "curb", "cut", "damage", "decrease", "delay",
    "devastate", "disrupt", "drive", "ease", "enable", "end", "exacerbate", "fight", "follow", "force",
    "fuel", "halt", "hamper", "help", "hinder", "hit", "impact", "increase", "induce", "intensify",
    "lead", "lessen", "limit", "lower", "mitigate", "postpone", "precede", "precipitate", "prevent", "produce",
    "prompt", "provoke", "raise", "reduce", "require", "restrict", "result", "slow", "spark", "spread",
    "spur", "start", "stop", "suppress", "threaten", "trigger", "worsen",
];

/// Irregular or consonant-doubling forms; regular forms are derived.
const IRREGULAR: &[(&str, &[&str])] = &[
    ("begin", &["began", "begun", "beginning"]),
    ("bring", &["brought"]),
    ("cut", &["cutting"]),
    ("drive", &["drove", "driven"]),
    ("fight", &["fought"]),
    ("hit", &["hitting"]),
    ("lead", &["led"]),
    ("spur", &["spurred", "spurring"]),
    ("stop", &["stopped", "stopping"]),
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn regular_forms(lemma: &str) -> Vec<String> {
    let b = lemma.as_bytes();
    let last = b[b.len() - 1];
    let consonant_y = last == b'y' && b.len() > 1 && !is_vowel(b[b.len() - 2]);
    let stem = &lemma[..lemma.len() - 1];
    let third = if ["s", "sh", "ch", "x", "z"].iter().any(|s| lemma.ends_with(s)) {
        format!("{lemma}es")
    } else if consonant_y {
        format!("{stem}ies")
    } else {
        format!("{lemma}s")
    };
    let past = if last == b'e' {
        format!("{lemma}d")
    } else if consonant_y {
        format!("{stem}ied")
    } else {
        format!("{lemma}ed")
    };
    let ing = if last == b'e' && !lemma.ends_with("ee") {
        format!("{stem}ing")
    } else {
        format!("{lemma}ing")
    };
    vec![lemma.to_string(), third, past, ing]
}

static FORMS: LazyLock<HashMap<String, &'static str>> = LazyLock::new(|| {
    let mut m = HashMap::new();
    for &v in VERBS {
        for f in regular_forms(v) {
            m.insert(f, v);
        }
    }
    for &(v, forms) in IRREGULAR {
        for f in forms {
            m.insert(f.to_string(), v);
        }
    }
    m
});

/// Lemma of a lowercased verb form from the verb lexicon.
pub fn verb_lemma(word: &str) -> Option<&'static str> {
    FORMS.get(word).copied()
}

/// Lemma used when matching a predicate span: the lexicon lemma of its last
/// token, or the lowercased token itself.
pub fn predicate_lemma(sentence: &Sentence, predicate: Span) -> Option<String> {
    let tok = sentence.tokens.get(predicate.end.checked_sub(1)?)?;
    Some(verb_lemma(&tok.lowercase).map_or_else(|| tok.lowercase.clone(), str::to_string))
}

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "its", "their", "his", "her", "our", "my", "your", "some",
    "any", "no", "every", "each", "many", "much", "more", "most", "several", "such",
];

const PREPOSITIONS: &[&str] = &[
    "to", "in", "by", "of", "for", "from", "with", "into", "on", "at", "after", "before", "during", "over", "among",
    "across", "against", "amid", "despite",
];

const FUNCTION_WORDS: &[&str] = &[
    "and", "or", "but", "is", "are", "was", "were", "be", "been", "being", "has", "have", "had", "will", "would",
    "could", "should", "may", "might", "can", "must", "do", "does", "did", "not", "also", "already", "further",
    "still", "then", "which", "who", "it", "they", "he", "she", "we", "i", "you", "as", "than", "so", "very",
    "largely", "partly", "directly", "quickly", "sharply", "significantly", "likely", "only", "up", "down", "off",
];

fn is_word(tok: &str) -> bool {
    tok.chars().next().is_some_and(char::is_alphanumeric)
}

/// A token that can belong to a noun phrase. Verb forms count only right
/// after a determiner ("the spread").
fn is_nominal(words: &[&str], i: usize) -> bool {
    let w = words[i];
    if !is_word(w) || DETERMINERS.contains(&w) || PREPOSITIONS.contains(&w) || FUNCTION_WORDS.contains(&w) {
        return false;
    }
    verb_lemma(w).is_none() || (i > 0 && DETERMINERS.contains(&words[i - 1]))
}

fn is_verb_at(words: &[&str], i: usize) -> bool {
    verb_lemma(words[i]).is_some() && !(i > 0 && DETERMINERS.contains(&words[i - 1]))
}

/// Noun phrase ending nearest before `verb`: skip function words, then take
/// the maximal run of nominal tokens.
fn preceding_np(words: &[&str], verb: usize) -> Option<Span> {
    let mut j = verb;
    while j > 0 {
        let w = words[j - 1];
        if is_nominal(words, j - 1) {
            break;
        }
        if !is_word(w) || PREPOSITIONS.contains(&w) || is_verb_at(words, j - 1) {
            return None;
        }
        j -= 1;
    }
    if j == 0 {
        return None;
    }
    let end = j;
    let mut start = end - 1;
    while start > 0 && is_nominal(words, start - 1) {
        start -= 1;
    }
    Some(Span::new(start, end))
}

/// Noun phrase starting nearest after `from`: skip determiners and function
/// words, then take the maximal run of nominal tokens.
fn following_np(words: &[&str], from: usize) -> Option<Span> {
    let mut k = from;
    while k < words.len() && !is_nominal(words, k) {
        let w = words[k];
        if !is_word(w) || PREPOSITIONS.contains(&w) || is_verb_at(words, k) {
            return None;
        }
        k += 1;
    }
    if k == words.len() {
        return None;
    }
    let start = k;
    while k < words.len() && is_nominal(words, k) {
        k += 1;
    }
    Some(Span::new(start, k))
}

/// Heuristic subject/object triples for every lexicon verb of a sentence.
///
/// The subject is the nearest noun phrase before the verb. The token after
/// the verb decides the second role: a preposition makes the following noun
/// phrase `prep_<p>`, anything else makes it the object. Argument spans
/// cover the whole noun phrase, whose head is its last token.
pub fn extract_svo_propositions(sentence: &Sentence) -> PropositionGraph {
    let words = sentence.lowercase_tokens();
    let mut propositions = Vec::new();
    for i in 0..words.len() {
        if !is_verb_at(&words, i) {
            continue;
        }
        let predicate = Span::new(i, i + 1);
        if let Some(arg) = preceding_np(&words, i) {
            propositions.push(Proposition {
                sentence: sentence.index,
                predicate,
                role: Role::Subject,
                argument: arg,
            });
        }
        let (role, from) = match words.get(i + 1) {
            Some(p) if PREPOSITIONS.contains(p) => (Role::Prep(p.to_string()), i + 2),
            _ => (Role::Object, i + 1),
        };
        if let Some(arg) = following_np(&words, from) {
            propositions.push(Proposition {
                sentence: sentence.index,
                predicate,
                role,
                argument: arg,
            });
        }
    }
    PropositionGraph { propositions }
}

/// Triples for one sentence of a document: the document's own triples when
/// it supplies any, otherwise the heuristic.
pub fn propositions_for(doc: &Document, sentence: &Sentence) -> PropositionGraph {
    match &doc.propositions {
        Some(all) => PropositionGraph {
            propositions: all
                .iter()
                .filter(|p| {
                    p.sentence == sentence.index && p.predicate.end <= sentence.len() && p.argument.end <= sentence.len()
                })
                .cloned()
                .collect(),
        },
        None => extract_svo_propositions(sentence),
    }
}
