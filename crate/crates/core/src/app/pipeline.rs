use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::AppError;
use crate::corpus::{ingest_documents, monthly_article_counts, segment_document, Document};
use crate::extraction::{
    read_jsonl, train_argument_model, train_on_tokens, ArgumentRecord, EventExtractor, EventMention, EventTagger,
    Gazetteer, TaggedTokens, TriggerLexicon,
};
use crate::month::{MonthRange, YearMonth};
use crate::relations::{
    featurize_examples, generate_examples, load_patterns, match_patterns, propositions_for, train_relation_classifier,
    union_and_dedup, NeuralRelationExtractor, RelationExample, RelationMention,
};
use crate::tcag::{build_tcag, export_tcag_json, FilterSpec};
use crate::taxonomy::Taxonomy;
use crate::vectors::HashedNgramEncoder;

/// Files written to the output directory, in write order.
pub const ARTIFACTS: [&str; 5] = ["mentions.jsonl", "relations.jsonl", "stats.json", "tcag.json", "taxonomy.json"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TaggerChoice {
    /// Longest-match trigger lexicon.
    #[default]
    Lexicon,
    /// Averaged-perceptron BIO tagger trained on the event training records.
    Perceptron,
}

/// Every path left as `None` falls back to the built-in resource.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub event_training: Option<PathBuf>,
    pub argument_training: Option<PathBuf>,
    pub relation_training: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Only documents published inside this range are processed.
    pub range: Option<MonthRange>,
    pub workers: Option<usize>,
    pub tagger: TaggerChoice,
    pub inherit_month: bool,
    pub neural: bool,
    pub neural_min_confidence: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            taxonomy: None,
            lexicon: None,
            gazetteer: None,
            patterns: None,
            event_training: None,
            argument_training: None,
            relation_training: None,
            out_dir: PathBuf::from("out"),
            range: None,
            workers: None,
            tagger: TaggerChoice::Lexicon,
            inherit_month: true,
            neural: true,
            neural_min_confidence: 0.5,
            epochs: 30,
            seed: 17,
        }
    }
}

/// Contents of `stats.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsFile {
    pub articles_per_month: BTreeMap<YearMonth, u64>,
    pub documents: usize,
    pub skipped_lines: usize,
    pub missing_date: usize,
    pub corpus_version: String,
    pub generated_at: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PipelineSummary {
    pub documents: usize,
    pub skipped_lines: usize,
    pub mentions_by_type: BTreeMap<String, u64>,
    pub relations_by_type: BTreeMap<String, u64>,
    pub relations_by_subtype: BTreeMap<String, u64>,
}

impl fmt::Display for PipelineSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents: {} (skipped lines: {})", self.documents, self.skipped_lines)?;
        writeln!(f, "{:<28} {:>8}", "event type", "mentions")?;
        let mut by_count: Vec<_> = self.mentions_by_type.iter().collect();
        by_count.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        for (t, c) in by_count {
            writeln!(f, "{t:<28} {c:>8}")?;
        }
        writeln!(f, "{:<28} {:>8}", "relation type", "count")?;
        for (t, c) in &self.relations_by_type {
            writeln!(f, "{t:<28} {c:>8}")?;
        }
        Ok(())
    }
}

fn read_text(stage: &'static str, path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::new(stage, format!("{}: {e}", path.display())))
}

fn resource(stage: &'static str, path: &Option<PathBuf>, builtin: &'static str) -> Result<String, AppError> {
    match path {
        Some(p) => read_text(stage, p),
        None => Ok(builtin.to_string()),
    }
}

/// Run the full pipeline and write every file in [`ARTIFACTS`] to
/// `config.out_dir`. Identical inputs produce identical bytes.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineSummary, AppError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| AppError::new("config", e))?;
    pool.install(|| run(config))
}

fn run(config: &PipelineConfig) -> Result<PipelineSummary, AppError> {
    let taxonomy_text = resource("taxonomy", &config.taxonomy, crate::data::TAXONOMY)?;
    let taxonomy = Taxonomy::from_json(&taxonomy_text).map_err(|e| AppError::new("taxonomy", e))?;
    let lexicon = TriggerLexicon::parse(&resource("lexicon", &config.lexicon, crate::data::LEXICON)?, &taxonomy)
        .map_err(|e| AppError::new("lexicon", e))?;
    let gazetteer = Gazetteer::parse(&resource("gazetteer", &config.gazetteer, crate::data::GAZETTEER)?)
        .map_err(|e| AppError::new("gazetteer", e))?;
    let patterns = load_patterns(&resource("patterns", &config.patterns, crate::data::PATTERNS)?)
        .map_err(|e| AppError::new("patterns", e))?;

    // ingest
    let mut hasher = Sha256::new();
    let mut raw = String::new();
    for path in &config.inputs {
        let text = read_text("ingest", path)?;
        hasher.update(text.as_bytes());
        raw.push_str(&text);
        raw.push('\n');
    }
    let corpus_version = format!("sha256:{:x}", hasher.finalize());
    let report = ingest_documents(raw.as_bytes()).map_err(|e| AppError::new("ingest", e))?;
    let docs: Vec<Document> = report
        .documents
        .into_par_iter()
        .filter(|d| config.range.as_ref().is_none_or(|r| d.in_range(r)))
        .map(segment_document)
        .collect();

    // models
    let argument_records: Vec<ArgumentRecord> =
        read_jsonl(&resource("train", &config.argument_training, crate::data::ARGUMENT_TRAINING)?)
            .map_err(|e| AppError::new("train", e))?;
    let argument_model = train_argument_model(&argument_records, config.epochs, config.seed)
        .map_err(|e| AppError::new("train", e))?;
    let trained_tagger;
    let tagger: &dyn EventTagger = match config.tagger {
        TaggerChoice::Lexicon => &lexicon,
        TaggerChoice::Perceptron => {
            let records: Vec<TaggedTokens> =
                read_jsonl(&resource("train", &config.event_training, crate::data::EVENT_TRAINING)?)
                    .map_err(|e| AppError::new("train", e))?;
            trained_tagger = train_on_tokens(&records, config.epochs, config.seed).map_err(|e| AppError::new("train", e))?;
            &trained_tagger
        }
    };

    // events
    let extractor = EventExtractor {
        tagger,
        argument_model: Some(&argument_model),
        gazetteer: &gazetteer,
        taxonomy: &taxonomy,
        inherit_month: config.inherit_month,
    };
    let per_doc: Vec<Vec<EventMention>> = docs.par_iter().map(|d| extractor.extract_document(d)).collect();
    let mentions: Vec<EventMention> = per_doc.iter().flatten().cloned().collect();

    // relations
    let pattern_out: Vec<RelationMention> = docs
        .par_iter()
        .zip(per_doc.par_iter())
        .flat_map_iter(|(d, ms)| {
            d.sentences
                .iter()
                .flat_map(|s| match_patterns(d, s, ms, &patterns, &propositions_for(d, s)))
                .collect::<Vec<_>>()
        })
        .collect();
    let neural_out: Vec<RelationMention> = if config.neural {
        let encoder = HashedNgramEncoder::default();
        let mut examples: Vec<RelationExample> =
            read_jsonl(&resource("train", &config.relation_training, crate::data::RELATION_TRAINING)?)
                .map_err(|e| AppError::new("train", e))?;
        examples.extend(generate_examples(&docs, &mentions, &patterns));
        let data = featurize_examples(&examples, &encoder).map_err(|e| AppError::new("train", e))?;
        let classifier =
            train_relation_classifier(&data, config.epochs, 0.1, config.seed).map_err(|e| AppError::new("train", e))?;
        let neural = NeuralRelationExtractor {
            classifier: &classifier,
            encoder: &encoder,
            min_confidence: config.neural_min_confidence,
        };
        docs.par_iter()
            .zip(per_doc.par_iter())
            .flat_map_iter(|(d, ms)| d.sentences.iter().flat_map(|s| neural.extract(d, s, ms)).collect::<Vec<_>>())
            .collect()
    } else {
        Vec::new()
    };
    let relations = union_and_dedup(&pattern_out, &neural_out);

    // graph
    let stats = monthly_article_counts(&docs);
    let generated_at = stats.month_range().map(|r| r.to.to_string()).unwrap_or_default();
    let mut tcag = build_tcag(&mentions, &relations, &taxonomy, &FilterSpec::default());
    tcag.generated_at = generated_at.clone();
    tcag.corpus_version = corpus_version.clone();
    let stats_file = StatsFile {
        articles_per_month: stats.articles_per_month,
        documents: docs.len(),
        skipped_lines: report.skipped,
        missing_date: report.missing_date,
        corpus_version,
        generated_at,
    };

    // write
    let write = |name: &str, bytes: &[u8]| -> Result<(), AppError> {
        let path = config.out_dir.join(name);
        fs::File::create(&path)
            .and_then(|mut f| f.write_all(bytes))
            .map_err(|e| AppError::new("write", format!("{}: {e}", path.display())))
    };
    fs::create_dir_all(&config.out_dir).map_err(|e| AppError::new("write", e))?;
    write(ARTIFACTS[0], &jsonl(&mentions))?;
    write(ARTIFACTS[1], &jsonl(&relations))?;
    write(ARTIFACTS[2], &pretty(&stats_file))?;
    write(ARTIFACTS[3], &export_tcag_json(&tcag))?;
    write(ARTIFACTS[4], &pretty(&taxonomy.to_value()))?;

    let mut summary = PipelineSummary {
        documents: docs.len(),
        skipped_lines: report.skipped,
        ..PipelineSummary::default()
    };
    for m in &mentions {
        *summary.mentions_by_type.entry(m.event_type.clone()).or_default() += 1;
    }
    for r in &relations {
        *summary.relations_by_type.entry(r.kind.to_string()).or_default() += 1;
        *summary.relations_by_subtype.entry(r.subtype.to_string()).or_default() += 1;
    }
    Ok(summary)
}

fn jsonl<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("record serializes");
        out.push(b'\n');
    }
    out
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("value serializes");
    out.push(b'\n');
    out
}
