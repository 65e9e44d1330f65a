use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{AppError, StatsFile};
use crate::corpus::CorpusStats;
use crate::extraction::{read_jsonl, EventMention};
use crate::relations::RelationMention;
use crate::tcag::{build_tcag, FilterSpec, Tcag};
use crate::taxonomy::Taxonomy;

/// Immutable state loaded from a pipeline output directory.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub mentions: Vec<EventMention>,
    pub relations: Vec<RelationMention>,
    pub taxonomy: Taxonomy,
    pub stats: StatsFile,
    /// Unfiltered graph, built once at load.
    pub tcag: Tcag,
    mention_index: HashMap<String, usize>,
}

impl Snapshot {
    pub fn new(mentions: Vec<EventMention>, relations: Vec<RelationMention>, taxonomy: Taxonomy, stats: StatsFile) -> Result<Self, AppError> {
        let mention_index: HashMap<String, usize> =
            mentions.iter().enumerate().map(|(i, m)| (m.id.clone(), i)).collect();
        if let Some(r) = relations
            .iter()
            .find(|r| !mention_index.contains_key(&r.left_event) || !mention_index.contains_key(&r.right_event))
        {
            return Err(AppError::new("load", format!("relation {} references an unknown mention", r.id)));
        }
        let mut tcag = build_tcag(&mentions, &relations, &taxonomy, &FilterSpec::default());
        tcag.generated_at = stats.generated_at.clone();
        tcag.corpus_version = stats.corpus_version.clone();
        Ok(Snapshot {
            mentions,
            relations,
            taxonomy,
            stats,
            tcag,
            mention_index,
        })
    }

    /// Load the artifacts written by the pipeline.
    pub fn load(dir: &Path) -> Result<Self, AppError> {
        let read = |name: &str| {
            fs::read_to_string(dir.join(name)).map_err(|e| AppError::new("load", format!("{}: {e}", dir.join(name).display())))
        };
        let mentions = read_jsonl(&read("mentions.jsonl")?).map_err(|e| AppError::new("load", e))?;
        let relations = read_jsonl(&read("relations.jsonl")?).map_err(|e| AppError::new("load", e))?;
        let taxonomy = Taxonomy::from_json(&read("taxonomy.json")?).map_err(|e| AppError::new("load", e))?;
        let stats: StatsFile = serde_json::from_str(&read("stats.json")?).map_err(|e| AppError::new("load", e))?;
        Snapshot::new(mentions, relations, taxonomy, stats)
    }

    pub fn mention(&self, id: &str) -> Option<&EventMention> {
        self.mention_index.get(id).map(|&i| &self.mentions[i])
    }

    pub fn corpus_stats(&self) -> CorpusStats {
        CorpusStats {
            articles_per_month: self.stats.articles_per_month.clone(),
        }
    }

    pub fn filtered_tcag(&self, filter: &FilterSpec) -> Tcag {
        if *filter == FilterSpec::default() {
            return self.tcag.clone();
        }
        let mut g = build_tcag(&self.mentions, &self.relations, &self.taxonomy, filter);
        g.generated_at = self.stats.generated_at.clone();
        g.corpus_version = self.stats.corpus_version.clone();
        g
    }
}
