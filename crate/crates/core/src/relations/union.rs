use std::collections::BTreeMap;

use super::RelationMention;

fn merge(into: &mut RelationMention, other: &RelationMention) {
    let take_other = other.confidence > into.confidence
        || (other.confidence == into.confidence && other.subtype < into.subtype);
    if take_other {
        into.subtype = other.subtype;
    }
    into.confidence = into.confidence.max(other.confidence);
    into.provenance.extend(other.provenance.iter().copied());
}

/// Merge mentions sharing (left event, right event, type).
///
/// The merged mention carries the union of provenances, the maximum
/// confidence and the subtype of the most confident contributor; on a
/// confidence tie the earlier subtype in declaration order wins, so the
/// result does not depend on argument order. Output is in relation sort
/// order.
pub fn union_and_dedup(pattern_out: &[RelationMention], neural_out: &[RelationMention]) -> Vec<RelationMention> {
    let mut merged: BTreeMap<(String, String, super::RelationType), RelationMention> = BTreeMap::new();
    for r in pattern_out.iter().chain(neural_out) {
        let key = (r.left_event.clone(), r.right_event.clone(), r.kind);
        match merged.get_mut(&key) {
            Some(existing) => merge(existing, r),
            None => {
                merged.insert(key, r.clone());
            }
        }
    }
    let mut out: Vec<RelationMention> = merged.into_values().collect();
    out.sort_by(|a, b| {
        a.sort_key()
            .cmp(&b.sort_key())
            .then_with(|| a.left_event.cmp(&b.left_event))
            .then_with(|| a.right_event.cmp(&b.right_event))
    });
    out
}
