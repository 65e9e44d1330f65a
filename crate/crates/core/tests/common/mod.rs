//! Fixture helpers and independently coded oracles shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use excavator::app::{run_pipeline, server, PipelineConfig, PipelineSummary, Snapshot};
use excavator::corpus::{ingest_documents, segment_document, Document, Sentence, Span};
use excavator::extraction::{read_jsonl, EventMention, LinearTaggerModel};
use excavator::month::YearMonth;
use excavator::relations::{predicate_lemma, PropositionGraph, RelationMention};
use excavator::tcag::{FilterSpec, Tcag};
use excavator::taxonomy::Taxonomy;
use rand::Rng;
use serde_json::Value;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_path() -> PathBuf {
    manifest_dir().join("tests/data/fixture_corpus.jsonl")
}

pub fn golden_dir() -> PathBuf {
    manifest_dir().join("tests/golden")
}

pub fn fixture_config(out: &Path, workers: usize) -> PipelineConfig {
    PipelineConfig {
        inputs: vec![fixture_path()],
        out_dir: out.to_path_buf(),
        workers: Some(workers),
        ..PipelineConfig::default()
    }
}

pub fn run_fixture(out: &Path, workers: usize) -> PipelineSummary {
    run_pipeline(&fixture_config(out, workers)).expect("fixture pipeline runs")
}

/// Run the pipeline over the fixture and load the result.
pub fn fixture_snapshot() -> Snapshot {
    let dir = tempfile::tempdir().unwrap();
    run_fixture(dir.path(), 2);
    Snapshot::load(dir.path()).expect("fixture snapshot loads")
}

/// Fixture documents, segmented, keyed by id.
pub fn fixture_documents() -> BTreeMap<String, Document> {
    let text = std::fs::read_to_string(fixture_path()).unwrap();
    ingest_documents(text.as_bytes())
        .unwrap()
        .documents
        .into_iter()
        .map(segment_document)
        .map(|d| (d.id.clone(), d))
        .collect()
}

/// Compare `bytes` with a golden file, or rewrite it when
/// `UPDATE_GOLDENS=1` is set.
pub fn check_golden(name: &str, bytes: &[u8]) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var("UPDATE_GOLDENS").is_ok_and(|v| v == "1") {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, bytes).unwrap();
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == bytes {
        Ok(())
    } else {
        Err(format!("{name} differs from its golden (rerun with UPDATE_GOLDENS=1 after review)"))
    }
}

// ---------------------------------------------------------------- popularity

/// Month as a linear index, independent of `YearMonth` arithmetic.
fn month_index(m: YearMonth) -> i64 {
    m.year() as i64 * 12 + (m.month() as i64 - 1)
}

fn index_month(i: i64) -> YearMonth {
    YearMonth::new(i.div_euclid(12) as i32, (i.rem_euclid(12) + 1) as u8).unwrap()
}

/// Brute-force popularity: for every month between the first and last month
/// with articles, average `count * 500 / articles` over the window months
/// that lie in that span and have articles. `strict` divides by the window
/// length instead. Returns scores and the months with an empty window.
pub fn popularity_oracle(
    counts: &BTreeMap<YearMonth, u64>,
    articles: &BTreeMap<YearMonth, u64>,
    window: usize,
    strict: bool,
) -> (BTreeMap<YearMonth, f64>, Vec<YearMonth>) {
    let with_articles: Vec<i64> = articles.iter().filter(|(_, a)| **a > 0).map(|(m, _)| month_index(*m)).collect();
    let (Some(&lo), Some(&hi)) = (with_articles.iter().min(), with_articles.iter().max()) else {
        return (BTreeMap::new(), Vec::new());
    };
    let half = (window as i64 - 1) / 2;
    let mut scores = BTreeMap::new();
    let mut skipped = Vec::new();
    for t in lo..=hi {
        let mut terms = Vec::new();
        for m in (t - half)..=(t + half) {
            if m < lo || m > hi {
                continue;
            }
            let a = articles.get(&index_month(m)).copied().unwrap_or(0);
            if a == 0 {
                continue;
            }
            let n = counts.get(&index_month(m)).copied().unwrap_or(0);
            terms.push(n as f64 * 500.0 / a as f64);
        }
        if terms.is_empty() {
            skipped.push(index_month(t));
            continue;
        }
        let denom = if strict { window } else { terms.len() } as f64;
        scores.insert(index_month(t), terms.iter().sum::<f64>() / denom);
    }
    (scores, skipped)
}

/// A random corpus: a run of 1..=24 months, some of them without articles,
/// with mention counts in months that have articles and a few strays outside.
pub fn random_volume_fixture<R: Rng>(rng: &mut R) -> (BTreeMap<YearMonth, u64>, BTreeMap<YearMonth, u64>) {
    let start = month_index(YearMonth::new(2019, 1).unwrap()) + rng.gen_range(0..24);
    let len = rng.gen_range(1..=24);
    let mut articles = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for i in 0..len {
        let m = index_month(start + i);
        let edge = i == 0 || i == len - 1;
        if edge || rng.gen_bool(0.8) {
            let a = rng.gen_range(1..2000u64);
            articles.insert(m, a);
            if rng.gen_bool(0.85) {
                counts.insert(m, rng.gen_range(0..300u64));
            }
        }
    }
    if rng.gen_bool(0.3) {
        counts.insert(index_month(start - 3), rng.gen_range(1..50));
    }
    (counts, articles)
}

// ------------------------------------------------------------------ patterns

#[derive(Debug, Clone)]
pub enum OracleBody {
    Lexical { middle: String, x_first: bool },
    Prop { lemma: String, roles: Vec<(String, char)> },
}

#[derive(Debug, Clone)]
pub struct OraclePattern {
    pub source: String,
    pub body: OracleBody,
    pub subtype: String,
}

/// Read a pattern file with plain string handling.
pub fn oracle_patterns(text: &str) -> Vec<OraclePattern> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, subtype) = line.rsplit_once("=>").unwrap();
        let head = head.trim();
        let body = if let Some(rest) = head.strip_prefix("lexical:") {
            let words: Vec<String> = rest.split_whitespace().map(str::to_lowercase).collect();
            let x_first = words[0] == "x";
            OracleBody::Lexical {
                middle: words[1..words.len() - 1].join(" "),
                x_first,
            }
        } else {
            let rest = head.split_once(':').unwrap().1.trim();
            let rest = rest.strip_prefix("verb:").unwrap_or(rest).trim();
            let mut parts = rest.split('[');
            let lemma = parts.next().unwrap().trim().to_lowercase();
            let roles = parts
                .map(|p| {
                    let (role, slot) = p.trim_end_matches(']').split_once('=').unwrap();
                    (role.trim().to_string(), slot.trim().chars().next().unwrap())
                })
                .collect();
            OracleBody::Prop { lemma, roles }
        };
        out.push(OraclePattern {
            source: line.to_string(),
            body,
            subtype: subtype.trim().to_string(),
        });
    }
    out
}

fn spans_overlap(a: Span, b: Span) -> bool {
    a.start < b.end && b.start < a.end
}

fn role_name(role: &excavator::relations::Role) -> String {
    serde_json::to_value(role).unwrap().as_str().unwrap().to_string()
}

/// Every (left id, right id, subtype) the patterns license in one sentence,
/// and the sources of the patterns that fired.
pub fn pattern_oracle(
    sentence: &Sentence,
    events: &[&EventMention],
    patterns: &[OraclePattern],
    props: &PropositionGraph,
) -> (BTreeSet<(String, String, String)>, BTreeSet<String>) {
    let words: Vec<String> = sentence.tokens.iter().map(|t| t.text.to_lowercase()).collect();
    let mut found = BTreeSet::new();
    let mut fired = BTreeSet::new();
    for a in events {
        for b in events {
            if a.id == b.id || spans_overlap(a.trigger_span, b.trigger_span) {
                continue;
            }
            for p in patterns {
                let hit = match &p.body {
                    OracleBody::Lexical { middle, x_first } => {
                        if a.trigger_span.end > b.trigger_span.start {
                            None
                        } else if words[a.trigger_span.end..b.trigger_span.start].join(" ") == *middle {
                            Some(if *x_first { (a, b) } else { (b, a) })
                        } else {
                            None
                        }
                    }
                    OracleBody::Prop { lemma, roles } => {
                        let ok = props.propositions.iter().any(|pred| {
                            predicate_lemma(sentence, pred.predicate).as_deref() == Some(lemma.as_str())
                                && roles.iter().all(|(role, slot)| {
                                    let target = if *slot == 'X' { a.trigger_span } else { b.trigger_span };
                                    props.propositions.iter().any(|q| {
                                        q.predicate == pred.predicate
                                            && role_name(&q.role) == *role
                                            && spans_overlap(q.argument, target)
                                    })
                                })
                        });
                        ok.then_some((a, b))
                    }
                };
                if let Some((l, r)) = hit {
                    found.insert((l.id.clone(), r.id.clone(), p.subtype.clone()));
                    fired.insert(p.source.clone());
                }
            }
        }
    }
    (found, fired)
}

// ---------------------------------------------------------------------- tcag

fn oracle_ancestors(taxonomy: &Taxonomy, ty: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<String> = taxonomy.get(ty).map(|t| t.parents.iter().cloned().collect()).unwrap_or_default();
    while let Some(p) = stack.pop() {
        if seen.insert(p.clone()) {
            stack.extend(taxonomy.get(&p).map(|t| t.parents.iter().cloned().collect::<Vec<_>>()).unwrap_or_default());
        }
    }
    seen
}

fn oracle_admits(filter: &FilterSpec, m: &EventMention) -> bool {
    let geo = filter.geo.as_ref().is_none_or(|g| match &m.geo {
        Some(x) => x == g,
        None => !filter.strict,
    });
    let month = filter.month.is_none_or(|want| match m.month {
        Some(x) => x == want,
        None => !filter.strict,
    });
    geo && month
}

pub type EdgeCounts = BTreeMap<(String, String, String), u64>;

/// Node and edge counts recomputed from the raw records.
pub fn tcag_recount(
    mentions: &[EventMention],
    relations: &[RelationMention],
    taxonomy: &Taxonomy,
    filter: &FilterSpec,
) -> (BTreeMap<String, u64>, EdgeCounts) {
    let kept: BTreeMap<&str, &EventMention> =
        mentions.iter().filter(|m| oracle_admits(filter, m)).map(|m| (m.id.as_str(), m)).collect();
    let mut nodes: BTreeMap<String, u64> = BTreeMap::new();
    for m in kept.values() {
        *nodes.entry(m.event_type.clone()).or_default() += 1;
        if filter.rollup {
            for a in oracle_ancestors(taxonomy, &m.event_type) {
                *nodes.entry(a).or_default() += 1;
            }
        }
    }
    let mut edges: EdgeCounts = BTreeMap::new();
    for r in relations {
        if let (Some(l), Some(rt)) = (kept.get(r.left_event.as_str()), kept.get(r.right_event.as_str())) {
            *edges
                .entry((r.kind.to_string(), l.event_type.clone(), rt.event_type.clone()))
                .or_default() += 1;
        }
    }
    edges.retain(|_, c| *c >= filter.min_edge_count);
    for child in nodes.keys() {
        for parent in taxonomy.get(child).map(|t| t.parents.clone()).unwrap_or_default() {
            if nodes.contains_key(&parent) {
                edges.insert(("IsA".to_string(), child.clone(), parent), 0);
            }
        }
    }
    (nodes, edges)
}

pub fn graph_counts(g: &Tcag) -> (BTreeMap<String, u64>, EdgeCounts) {
    let nodes = g.nodes.iter().map(|n| (n.event_type.clone(), n.mention_count)).collect();
    let edges = g
        .edges
        .iter()
        .map(|e| ((e.kind.to_string(), e.left.clone(), e.right.clone()), e.count))
        .collect();
    (nodes, edges)
}

/// Random filters drawn from the geos and months present in the snapshot.
pub fn random_filter<R: Rng>(rng: &mut R, snap: &Snapshot) -> FilterSpec {
    let geos: Vec<String> = snap.mentions.iter().filter_map(|m| m.geo.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let months: Vec<YearMonth> = snap.stats.articles_per_month.keys().copied().collect();
    FilterSpec {
        geo: rng.gen_bool(0.6).then(|| geos[rng.gen_range(0..geos.len())].clone()),
        month: rng.gen_bool(0.6).then(|| months[rng.gen_range(0..months.len())]),
        min_edge_count: rng.gen_range(1..=4),
        strict: rng.gen_bool(0.5),
        rollup: rng.gen_bool(0.5),
    }
}

// -------------------------------------------------------------------- tagger

/// Score of a label sequence summed straight from the weight tables, using
/// only the `bias` and `w=<word>` features.
pub fn oracle_sequence_score(model: &LinearTaggerModel, words: &[&str], labels: &[usize]) -> f64 {
    let start = model.labels.len();
    let mut prev = start;
    let mut total = 0.0;
    for (w, &y) in words.iter().zip(labels) {
        for f in ["bias".to_string(), format!("w={w}")] {
            if let Some(row) = model.emissions.get(&f) {
                total += row[y];
            }
        }
        total += model.transitions[prev][y];
        prev = y;
    }
    total
}

/// Best sequence by enumerating every labelling.
pub fn enumerate_best(model: &LinearTaggerModel, words: &[&str]) -> (Vec<usize>, f64) {
    let k = model.labels.len();
    let n = words.len();
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for code in 0..k.pow(n as u32) {
        let mut c = code;
        let labels: Vec<usize> = (0..n)
            .map(|_| {
                let y = c % k;
                c /= k;
                y
            })
            .collect();
        let s = oracle_sequence_score(model, words, &labels);
        if s > best.1 {
            best = (labels, s);
        }
    }
    best
}

// ------------------------------------------------------------------- service

/// The HTTP service on an ephemeral port, stopped when dropped.
pub struct TestServer {
    pub addr: SocketAddr,
    runtime: tokio::runtime::Runtime,
}

impl TestServer {
    pub fn start(snapshot: Snapshot) -> Self {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
        let addr = listener.local_addr().unwrap();
        runtime.spawn(server::serve_listener(Arc::new(snapshot), listener));
        TestServer { addr, runtime }
    }

    /// Raw HTTP/1.1 request; returns status and parsed JSON body.
    pub fn request(&self, method: &str, target: &str) -> (u16, Value) {
        let mut stream = TcpStream::connect(self.addr).unwrap();
        write!(stream, "{method} {target} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
        let mut raw = Vec::new();
        stream.read_to_end(&mut raw).unwrap();
        let text = String::from_utf8(raw).unwrap();
        let (head, body) = text.split_once("\r\n\r\n").expect("response has a header block");
        let status: u16 = head.split_whitespace().nth(1).unwrap().parse().unwrap();
        let json = serde_json::from_str(body).unwrap_or_else(|e| panic!("non-JSON body for {target}: {e}: {body:?}"));
        (status, json)
    }

    pub fn get(&self, target: &str) -> (u16, Value) {
        self.request("GET", target)
    }

    pub fn shutdown(self) {
        self.runtime.shutdown_background();
    }
}

// ------------------------------------------------------------- json schemas

fn field<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a Value, String> {
    v.get(key).ok_or_else(|| format!("{ctx}: missing `{key}`"))
}

fn is_month(v: &Value) -> bool {
    v.as_str().is_some_and(|s| s.parse::<YearMonth>().is_ok())
}

pub fn check_tcag_schema(v: &Value) -> Result<(), String> {
    if field(v, "schema", "tcag")? != "tcag/1" {
        return Err("tcag: schema is not tcag/1".into());
    }
    for key in ["generated_at", "corpus_version"] {
        field(v, key, "tcag")?.as_str().ok_or(format!("tcag: `{key}` not a string"))?;
    }
    field(v, "filter", "tcag")?.as_object().ok_or("tcag: filter not an object")?;
    let nodes = field(v, "nodes", "tcag")?.as_array().ok_or("tcag: nodes not an array")?;
    let mut names = BTreeSet::new();
    for n in nodes {
        let name = field(n, "event_type", "node")?.as_str().ok_or("node: event_type")?;
        let c = field(n, "mention_count", "node")?.as_u64().ok_or("node: mention_count")?;
        let s = field(n, "display_size", "node")?.as_f64().ok_or("node: display_size")?;
        if (s - (c as f64).ln_1p()).abs() > 1e-12 {
            return Err(format!("node {name}: display_size off the log scale"));
        }
        names.insert(name.to_string());
    }
    for e in field(v, "edges", "tcag")?.as_array().ok_or("tcag: edges not an array")? {
        let kind = field(e, "kind", "edge")?.as_str().ok_or("edge: kind")?;
        if !["Causes", "Mitigates", "Before", "IsA"].contains(&kind) {
            return Err(format!("edge: bad kind {kind}"));
        }
        for end in ["left", "right"] {
            let n = field(e, end, "edge")?.as_str().ok_or("edge: endpoint")?;
            if !names.contains(n) {
                return Err(format!("edge endpoint {n} is not a node"));
            }
        }
        field(e, "count", "edge")?.as_u64().ok_or("edge: count")?;
        field(e, "display_thickness", "edge")?.as_f64().ok_or("edge: display_thickness")?;
        let style = field(e, "style", "edge")?.as_str().ok_or("edge: style")?;
        if (kind == "IsA") != (style == "dashed") {
            return Err(format!("edge {kind}: style {style}"));
        }
    }
    Ok(())
}

pub fn check_series_schema(v: &Value) -> Result<(), String> {
    field(v, "event", "series")?.as_str().ok_or("series: event")?;
    field(v, "window", "series")?.as_u64().ok_or("series: window")?;
    if field(v, "norm_divisor", "series")?.as_f64() != Some(500.0) {
        return Err("series: norm_divisor".into());
    }
    for p in field(v, "points", "series")?.as_array().ok_or("series: points")? {
        if !is_month(field(p, "month", "point")?) {
            return Err("point: month".into());
        }
        let s = field(p, "score", "point")?.as_f64().ok_or("point: score")?;
        if !(s.is_finite() && s >= 0.0) {
            return Err("point: score not finite and non-negative".into());
        }
    }
    if !field(v, "skipped_months", "series")?.as_array().ok_or("series: skipped_months")?.iter().all(is_month) {
        return Err("series: skipped_months".into());
    }
    Ok(())
}

pub fn check_taxonomy_schema(v: &Value) -> Result<(), String> {
    field(v, "version", "taxonomy")?;
    let types = field(v, "types", "taxonomy")?.as_array().ok_or("taxonomy: types")?;
    if types.is_empty() {
        return Err("taxonomy: no types".into());
    }
    for t in types {
        field(t, "name", "type")?.as_str().ok_or("type: name")?;
        field(t, "parents", "type")?.as_array().ok_or("type: parents")?;
    }
    Ok(())
}

pub fn check_top_states_schema(v: &Value) -> Result<(), String> {
    field(v, "event", "top_states")?.as_str().ok_or("top_states: event")?;
    let k = field(v, "k", "top_states")?.as_u64().ok_or("top_states: k")?;
    let states = field(v, "states", "top_states")?.as_array().ok_or("top_states: states")?;
    if states.len() as u64 > k {
        return Err("top_states: more than k states".into());
    }
    let mut last = u64::MAX;
    for s in states {
        let geo = field(s, "geo", "state")?.as_str().ok_or("state: geo")?;
        if !geo.starts_with("US-") {
            return Err(format!("state {geo} is not a US state"));
        }
        let m = field(s, "mentions", "state")?.as_u64().ok_or("state: mentions")?;
        if m > last {
            return Err("top_states: not ordered by mentions".into());
        }
        last = m;
        check_series_schema(field(s, "series", "state")?)?;
    }
    Ok(())
}

pub fn check_correlate_schema(v: &Value) -> Result<(), String> {
    let defined = field(v, "defined", "correlate")?.as_bool().ok_or("correlate: defined")?;
    let r = field(v, "r", "correlate")?;
    match (defined, r.as_f64()) {
        (true, Some(x)) if (-1.0..=1.0).contains(&x) => {}
        (false, None) if r.is_null() => {}
        _ => return Err("correlate: r inconsistent with defined".into()),
    }
    check_series_schema(field(v, "left", "correlate")?)?;
    check_series_schema(field(v, "right", "correlate")?)
}

pub fn check_evidence_schema(v: &Value) -> Result<(), String> {
    let total = field(v, "total", "evidence")?.as_u64().ok_or("evidence: total")?;
    let limit = field(v, "limit", "evidence")?.as_u64().ok_or("evidence: limit")?;
    let items = field(v, "items", "evidence")?.as_array().ok_or("evidence: items")?;
    if items.len() as u64 > limit.min(total) {
        return Err("evidence: too many items".into());
    }
    for it in items {
        for key in ["relation_id", "subtype", "left_event", "right_event", "left_text", "right_text"] {
            field(it, key, "item")?.as_str().ok_or(format!("item: {key}"))?;
        }
        field(it, "confidence", "item")?.as_f64().ok_or("item: confidence")?;
        let ev = field(it, "evidence", "item")?;
        field(ev, "text", "evidence")?.as_str().ok_or("evidence: text")?;
        field(ev, "char_span", "evidence")?;
    }
    Ok(())
}

/// Every evidence item must quote the fixture sentence holding both
/// triggers of a relation in `relations.jsonl`.
pub fn check_evidence_items(
    items: &[Value],
    relations: &BTreeMap<String, &RelationMention>,
    docs: &BTreeMap<String, Document>,
) -> Result<(), String> {
    for it in items {
        let id = it["relation_id"].as_str().unwrap();
        let rel = relations.get(id).ok_or(format!("{id} is not in relations.jsonl"))?;
        let ev: excavator::relations::Evidence = serde_json::from_value(it["evidence"].clone()).map_err(|e| e.to_string())?;
        if ev != rel.evidence {
            return Err(format!("{id}: evidence differs from relations.jsonl"));
        }
        let doc = docs.get(&ev.doc_id).ok_or(format!("{id}: unknown document"))?;
        if doc.body.get(ev.char_span.start..ev.char_span.end) != Some(ev.text.as_str()) {
            return Err(format!("{id}: evidence text is not the document sentence"));
        }
        let sentence = &doc.sentences[ev.sentence_index];
        for span in [rel.left_span, rel.right_span] {
            let cs = sentence.token_char_span(span);
            if !ev.char_span.contains_span(&cs) {
                return Err(format!("{id}: trigger span lies outside the evidence sentence"));
            }
        }
        for key in ["left_text", "right_text"] {
            if !ev.text.contains(it[key].as_str().unwrap()) {
                return Err(format!("{id}: {key} missing from the sentence"));
            }
        }
    }
    Ok(())
}

pub fn read_relations(dir: &Path) -> Vec<RelationMention> {
    read_jsonl(&std::fs::read_to_string(dir.join("relations.jsonl")).unwrap()).unwrap()
}
pub mod checks;
