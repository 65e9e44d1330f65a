use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Relation types shown in the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationType {
    Causes,
    Mitigates,
    Before,
}

impl RelationType {
    pub const ALL: [RelationType; 3] = [RelationType::Causes, RelationType::Mitigates, RelationType::Before];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationType::Causes => "Causes",
            RelationType::Mitigates => "Mitigates",
            RelationType::Before => "Before",
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown relation type `{s}`"))
    }
}

/// Extractor-level relation subtypes. X is the left argument, Y the right.
///
/// | subtype      | meaning                               |
/// |--------------|---------------------------------------|
/// | Cause        | Y happens because of X                |
/// | Catalyst     | if X, the intensity of Y increases    |
/// | Precondition | X must have occurred for Y to happen  |
/// | Mitigation   | if X, the intensity of Y decreases    |
/// | Preventative | if X happens, Y cannot happen         |
/// | BeforeAfter  | X happens before/after Y              |
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationSubtype {
    Cause,
    Catalyst,
    Precondition,
    Mitigation,
    Preventative,
    BeforeAfter,
}

impl RelationSubtype {
    pub const ALL: [RelationSubtype; 6] = [
        RelationSubtype::Cause,
        RelationSubtype::Catalyst,
        RelationSubtype::Precondition,
        RelationSubtype::Mitigation,
        RelationSubtype::Preventative,
        RelationSubtype::BeforeAfter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationSubtype::Cause => "Cause",
            RelationSubtype::Catalyst => "Catalyst",
            RelationSubtype::Precondition => "Precondition",
            RelationSubtype::Mitigation => "Mitigation",
            RelationSubtype::Preventative => "Preventative",
            RelationSubtype::BeforeAfter => "BeforeAfter",
        }
    }

    pub fn relation_type(self) -> RelationType {
        merge_subtype_to_type(self)
    }
}

impl fmt::Display for RelationSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationSubtype {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationSubtype::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown relation subtype `{s}`"))
    }
}

pub fn merge_subtype_to_type(subtype: RelationSubtype) -> RelationType {
    match subtype {
        RelationSubtype::Cause | RelationSubtype::Catalyst | RelationSubtype::Precondition => RelationType::Causes,
        RelationSubtype::Mitigation | RelationSubtype::Preventative => RelationType::Mitigates,
        RelationSubtype::BeforeAfter => RelationType::Before,
    }
}
