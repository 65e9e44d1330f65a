use std::collections::BTreeSet;

use super::pattern::{Pattern, PatternBody, Slot};
use super::propositions::{predicate_lemma, PropositionGraph};
use super::{Evidence, Extractor, RelationMention, RelationSubtype};
use crate::corpus::{Document, Sentence, Span};
use crate::extraction::EventMention;

fn lexical_match(words: &[&str], first: Span, second: Span, interior: &[String]) -> bool {
    first.end <= second.start
        && second.start - first.end == interior.len()
        && words[first.end..second.start].iter().zip(interior).all(|(w, p)| *w == p)
}

fn proposition_match(
    sentence: &Sentence,
    props: &PropositionGraph,
    lemma: &str,
    constraints: &[(super::Role, Slot)],
    x: Span,
    y: Span,
) -> bool {
    let predicates: BTreeSet<Span> = props.propositions.iter().map(|p| p.predicate).collect();
    predicates.into_iter().any(|pred| {
        predicate_lemma(sentence, pred).as_deref() == Some(lemma)
            && constraints.iter().all(|(role, slot)| {
                let target = if *slot == Slot::X { x } else { y };
                props
                    .propositions
                    .iter()
                    .any(|p| p.predicate == pred && p.role == *role && p.argument.overlaps(&target))
            })
    })
}

/// Apply every pattern to every ordered pair of distinct, non-overlapping
/// event mentions of `sentence`.
///
/// Matches are confidence 1.0 with `pattern` provenance. Each distinct
/// (left, right, subtype) is emitted once, in relation sort order.
pub fn match_patterns(
    doc: &Document,
    sentence: &Sentence,
    events: &[EventMention],
    patterns: &[Pattern],
    props: &PropositionGraph,
) -> Vec<RelationMention> {
    let events: Vec<&EventMention> = events
        .iter()
        .filter(|e| e.doc_id == doc.id && e.sentence_index == sentence.index && e.trigger_span.end <= sentence.len())
        .collect();
    let words = sentence.lowercase_tokens();
    let mut found: BTreeSet<(usize, usize, RelationSubtype)> = BTreeSet::new();
    for (a, ea) in events.iter().enumerate() {
        for (b, eb) in events.iter().enumerate() {
            if a == b || ea.trigger_span.overlaps(&eb.trigger_span) {
                continue;
            }
            for p in patterns {
                match &p.body {
                    // (a, b) is the surface order here
                    PatternBody::Lexical { interior, x_first } => {
                        if lexical_match(&words, ea.trigger_span, eb.trigger_span, interior) {
                            let (l, r) = if *x_first { (a, b) } else { (b, a) };
                            found.insert((l, r, p.subtype));
                        }
                    }
                    // (a, b) is (X, Y) here
                    PatternBody::Proposition { lemma, constraints } => {
                        if proposition_match(sentence, props, lemma, constraints, ea.trigger_span, eb.trigger_span) {
                            found.insert((a, b, p.subtype));
                        }
                    }
                }
            }
        }
    }
    let mut out: Vec<RelationMention> = found
        .into_iter()
        .map(|(l, r, subtype)| {
            RelationMention::new(events[l], events[r], subtype, Evidence::new(doc, sentence), Extractor::Pattern, 1.0)
        })
        .collect();
    out.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()).then(x.subtype.cmp(&y.subtype)));
    out
}
