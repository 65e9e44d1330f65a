//! Event taxonomy with `is_a` links.
//!
//! The taxonomy file is JSON with a version string and one entry per type:
//!
//! ```json
//! { "version": "...",
//!   "types": [ { "name": "COVID-19", "description": "...", "parents": ["Virus", "Disease"] } ] }
//! ```

mod cluster;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cluster::{discover_event_clusters, embed_phrases, Cluster, ClusterParams, PhraseVector};

#[derive(Debug, Error, PartialEq)]
pub enum TaxonomyError {
    #[error("taxonomy parse error: {0}")]
    Parse(String),
    #[error("invalid type name `{0}`")]
    InvalidName(String),
    #[error("duplicate type `{0}`")]
    Duplicate(String),
    #[error("type `{child}` has unknown parent `{parent}`")]
    DanglingParent { child: String, parent: String },
    #[error("is_a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("unknown event type `{0}`")]
    UnknownType(String),
    #[error("clustering needs at least two phrases, got {0}")]
    TooFewPhrases(usize),
    #[error("phrase `{phrase}` has dimension {found}, expected {expected}")]
    DimensionMismatch {
        phrase: String,
        expected: usize,
        found: usize,
    },
    #[error("phrase `{0}` has a non-finite vector entry")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventType {
    pub name: String,
    pub description: String,
    #[serde(default)]
    pub parents: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    pub version: String,
    pub types: BTreeMap<String, EventType>,
}

#[derive(Deserialize)]
struct TaxonomyFile {
    version: String,
    types: Vec<EventType>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '-')
}

impl Taxonomy {
    /// Parse and validate a taxonomy document.
    pub fn from_json(text: &str) -> Result<Self, TaxonomyError> {
        let file: TaxonomyFile =
            serde_json::from_str(text).map_err(|e| TaxonomyError::Parse(e.to_string()))?;
        let mut types = BTreeMap::new();
        for t in file.types {
            if !valid_name(&t.name) {
                return Err(TaxonomyError::InvalidName(t.name));
            }
            if types.contains_key(&t.name) {
                return Err(TaxonomyError::Duplicate(t.name));
            }
            types.insert(t.name.clone(), t);
        }
        let taxonomy = Taxonomy {
            version: file.version,
            types,
        };
        taxonomy.validate()?;
        Ok(taxonomy)
    }

    fn validate(&self) -> Result<(), TaxonomyError> {
        for t in self.types.values() {
            if let Some(p) = t.parents.iter().find(|p| !self.types.contains_key(*p)) {
                return Err(TaxonomyError::DanglingParent {
                    child: t.name.clone(),
                    parent: p.clone(),
                });
            }
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        let mut stack: Vec<&str> = Vec::new();
        for name in self.types.keys() {
            self.visit(name, &mut state, &mut stack)?;
        }
        Ok(())
    }

    fn visit<'a>(
        &'a self,
        name: &'a str,
        state: &mut BTreeMap<&'a str, u8>,
        stack: &mut Vec<&'a str>,
    ) -> Result<(), TaxonomyError> {
        match state.get(name).copied().unwrap_or(0) {
            2 => return Ok(()),
            1 => {
                let from = stack.iter().position(|n| *n == name).unwrap_or(0);
                let mut path: Vec<String> = stack[from..].iter().map(|s| s.to_string()).collect();
                path.push(name.to_string());
                return Err(TaxonomyError::Cycle(path));
            }
            _ => {}
        }
        state.insert(name, 1);
        stack.push(name);
        for p in &self.types[name].parents {
            self.visit(p, state, stack)?;
        }
        stack.pop();
        state.insert(name, 2);
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.types.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Result<&EventType, TaxonomyError> {
        self.types
            .get(name)
            .ok_or_else(|| TaxonomyError::UnknownType(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Transitive closure of `parents`, excluding the type itself.
    pub fn ancestors(&self, name: &str) -> Result<BTreeSet<String>, TaxonomyError> {
        let mut out = BTreeSet::new();
        let mut frontier: Vec<&str> = self.get(name)?.parents.iter().map(String::as_str).collect();
        while let Some(p) = frontier.pop() {
            if out.insert(p.to_string()) {
                frontier.extend(self.types[p].parents.iter().map(String::as_str));
            }
        }
        Ok(out)
    }

    /// The file format, types ordered by name.
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::json!({
            "version": self.version,
            "types": self.types.values().collect::<Vec<_>>(),
        })
    }
}
