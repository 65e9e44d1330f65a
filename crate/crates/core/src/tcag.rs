//! Temporal and causal analysis graph: event types as nodes, aggregated
//! Causes/Mitigates/Before relations and dashed is-a links as edges.
//!
//! Exported documents follow schema `tcag/1`:
//!
//! ```text
//! {
//!   "corpus_version": string,
//!   "edges": [{"count", "display_thickness", "kind", "left", "right", "style"}],
//!   "filter": {"geo", "min_edge_count", "month", "rollup", "strict"},
//!   "generated_at": string,
//!   "nodes": [{"display_size", "event_type", "mention_count"}],
//!   "schema": "tcag/1"
//! }
//! ```
//!
//! Keys are sorted, nodes are ordered by type name and edges by
//! `(kind, left, right)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::EventMention;
use crate::month::YearMonth;
use crate::relations::{RelationMention, RelationType};
use crate::taxonomy::Taxonomy;

pub const SCHEMA_VERSION: &str = "tcag/1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TcagError {
    #[error("no node named `{0}` in the graph")]
    UnknownNode(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FilterSpec {
    pub geo: Option<String>,
    pub month: Option<YearMonth>,
    pub min_edge_count: u64,
    /// Drop mentions that lack the filtered attribute instead of keeping them.
    #[serde(default)]
    pub strict: bool,
    /// Also count each mention toward every ancestor type.
    #[serde(default)]
    pub rollup: bool,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            geo: None,
            month: None,
            min_edge_count: 1,
            strict: false,
            rollup: false,
        }
    }
}

impl FilterSpec {
    pub fn admits(&self, mention: &EventMention) -> bool {
        let geo_ok = match (&self.geo, &mention.geo) {
            (None, _) => true,
            (Some(want), Some(got)) => want == got,
            (Some(_), None) => !self.strict,
        };
        let month_ok = match (self.month, mention.month) {
            (None, _) => true,
            (Some(want), Some(got)) => want == got,
            (Some(_), None) => !self.strict,
        };
        geo_ok && month_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Causes,
    Mitigates,
    Before,
    IsA,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Causes => "Causes",
            EdgeKind::Mitigates => "Mitigates",
            EdgeKind::Before => "Before",
            EdgeKind::IsA => "IsA",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [EdgeKind::Causes, EdgeKind::Mitigates, EdgeKind::Before, EdgeKind::IsA]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<RelationType> for EdgeKind {
    fn from(t: RelationType) -> Self {
        match t {
            RelationType::Causes => EdgeKind::Causes,
            RelationType::Mitigates => EdgeKind::Mitigates,
            RelationType::Before => EdgeKind::Before,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStyle {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcagNode {
    pub event_type: String,
    pub mention_count: u64,
    pub display_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcagEdge {
    pub kind: EdgeKind,
    pub left: String,
    pub right: String,
    pub count: u64,
    pub display_thickness: f64,
    pub style: EdgeStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tcag {
    pub schema: String,
    pub nodes: Vec<TcagNode>,
    pub edges: Vec<TcagEdge>,
    pub filter: FilterSpec,
    pub generated_at: String,
    pub corpus_version: String,
}

impl Tcag {
    pub fn node(&self, event_type: &str) -> Option<&TcagNode> {
        self.nodes.iter().find(|n| n.event_type == event_type)
    }

    pub fn edge(&self, kind: EdgeKind, left: &str, right: &str) -> Option<&TcagEdge> {
        self.edges.iter().find(|e| e.kind == kind && e.left == left && e.right == right)
    }
}

/// Log display scale shared by node sizes and edge thicknesses.
pub fn display_scale(count: u64) -> f64 {
    (count as f64).ln_1p()
}

/// Aggregate mentions and relations surviving `filter`.
///
/// Relations are kept only when both endpoint mentions survive. `generated_at`
/// and `corpus_version` are left empty for the caller to fill.
pub fn build_tcag(
    mentions: &[EventMention],
    relations: &[RelationMention],
    taxonomy: &Taxonomy,
    filter: &FilterSpec,
) -> Tcag {
    let surviving: HashMap<&str, &EventMention> = mentions
        .iter()
        .filter(|m| filter.admits(m))
        .map(|m| (m.id.as_str(), m))
        .collect();

    let mut node_counts: BTreeMap<String, u64> = BTreeMap::new();
    for m in surviving.values() {
        *node_counts.entry(m.event_type.clone()).or_default() += 1;
        if filter.rollup {
            for a in taxonomy.ancestors(&m.event_type).unwrap_or_default() {
                *node_counts.entry(a).or_default() += 1;
            }
        }
    }

    let mut edge_counts: BTreeMap<(EdgeKind, String, String), u64> = BTreeMap::new();
    for r in relations {
        let (Some(l), Some(rt)) = (surviving.get(r.left_event.as_str()), surviving.get(r.right_event.as_str())) else {
            continue;
        };
        *edge_counts
            .entry((r.kind.into(), l.event_type.clone(), rt.event_type.clone()))
            .or_default() += 1;
    }

    let nodes: Vec<TcagNode> = node_counts
        .iter()
        .map(|(t, &c)| TcagNode {
            event_type: t.clone(),
            mention_count: c,
            display_size: display_scale(c),
        })
        .collect();

    let mut edges: Vec<TcagEdge> = edge_counts
        .into_iter()
        .filter(|(_, c)| *c >= filter.min_edge_count)
        .map(|((kind, left, right), count)| TcagEdge {
            kind,
            left,
            right,
            count,
            display_thickness: display_scale(count),
            style: EdgeStyle::Solid,
        })
        .collect();
    for child in node_counts.keys() {
        let Ok(ty) = taxonomy.get(child) else { continue };
        for parent in ty.parents.iter().filter(|p| node_counts.contains_key(*p)) {
            edges.push(TcagEdge {
                kind: EdgeKind::IsA,
                left: child.clone(),
                right: parent.clone(),
                count: 0,
                display_thickness: 0.0,
                style: EdgeStyle::Dashed,
            });
        }
    }
    edges.sort_by(|a, b| (a.kind.as_str(), &a.left, &a.right).cmp(&(b.kind.as_str(), &b.left, &b.right)));

    Tcag {
        schema: SCHEMA_VERSION.to_string(),
        nodes,
        edges,
        filter: filter.clone(),
        generated_at: String::new(),
        corpus_version: String::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorRole {
    /// The focused node.
    Blue,
    /// Causes, mitigates or precedes the focused node.
    Orange,
    /// Caused, mitigated or preceded by the focused node.
    Green,
    Neutral,
}

/// Color every node relative to `focused`. Is-a edges are ignored; a node
/// that is both upstream and downstream is orange.
pub fn assign_focus_colors(tcag: &Tcag, focused: &str) -> Result<BTreeMap<String, ColorRole>, TcagError> {
    if tcag.node(focused).is_none() {
        return Err(TcagError::UnknownNode(focused.to_string()));
    }
    let mut upstream = BTreeSet::new();
    let mut downstream = BTreeSet::new();
    for e in tcag.edges.iter().filter(|e| e.kind != EdgeKind::IsA) {
        if e.right == focused && e.left != focused {
            upstream.insert(e.left.as_str());
        }
        if e.left == focused && e.right != focused {
            downstream.insert(e.right.as_str());
        }
    }
    Ok(tcag
        .nodes
        .iter()
        .map(|n| {
            let t = n.event_type.as_str();
            let role = if t == focused {
                ColorRole::Blue
            } else if upstream.contains(t) {
                ColorRole::Orange
            } else if downstream.contains(t) {
                ColorRole::Green
            } else {
                ColorRole::Neutral
            };
            (n.event_type.clone(), role)
        })
        .collect())
}

/// Canonical JSON value: object keys sorted at every level.
pub fn tcag_value(tcag: &Tcag) -> serde_json::Value {
    // serde_json's map is ordered by key unless `preserve_order` is enabled
    serde_json::to_value(tcag).expect("tcag serializes")
}

/// Canonical, byte-stable JSON document with a trailing newline.
pub fn export_tcag_json(tcag: &Tcag) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&tcag_value(tcag)).expect("tcag serializes");
    out.push(b'\n');
    out
}
