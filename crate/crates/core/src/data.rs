//! Resources compiled into the binary. Each can be overridden from the
//! command line with a file of the same format.

pub const TAXONOMY: &str = include_str!("../data/taxonomy.json");
pub const LEXICON: &str = include_str!("../data/lexicon.tsv");
pub const GAZETTEER: &str = include_str!("../data/gazetteer.tsv");
pub const PATTERNS: &str = include_str!("../data/patterns.txt");
/// Trigger tagging records, one `{tokens, tags}` object per line.
pub const EVENT_TRAINING: &str = include_str!("../data/event_train.jsonl");
/// Argument records, one `{tokens, trigger, tags}` object per line.
pub const ARGUMENT_TRAINING: &str = include_str!("../data/argument_train.jsonl");
/// Relation records, one `{tokens, left, right, label}` object per line.
pub const RELATION_TRAINING: &str = include_str!("../data/relation_train.jsonl");
