//! One check per acceptance criterion. Each returns a short summary on
//! success and the first discrepancy on failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::time::{Duration, Instant};

use excavator::app::{Snapshot, ARTIFACTS};
use excavator::corpus::{CorpusStats, Span};
use excavator::extraction::{decode_bio_spans, encode_bio_spans, EventMention, LinearTaggerModel};
use excavator::month::YearMonth;
use excavator::relations::{
    load_patterns, match_patterns, merge_subtype_to_type, pair_representation, propositions_for, softmax,
    train_relation_classifier, ClassLabel, Extractor, RelationSubtype, RelationType,
};
use excavator::tcag::{assign_focus_colors, build_tcag, export_tcag_json, tcag_value, EdgeKind, FilterSpec};
use excavator::timeline::{popularity_series, MonthlyCounts, WindowPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::*;

pub type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn series_for(counts: &BTreeMap<YearMonth, u64>, articles: &BTreeMap<YearMonth, u64>, window: usize, policy: WindowPolicy) -> excavator::timeline::PopularitySeries {
    let mc = MonthlyCounts {
        event_type: "E".into(),
        geo: None,
        counts: counts.clone(),
    };
    let stats = CorpusStats {
        articles_per_month: articles.clone(),
    };
    popularity_series(&mc, &stats, window, policy).unwrap()
}

// ---------------------------------------------------------------- popularity

pub fn popularity_oracle_check() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let (counts, articles) = random_volume_fixture(&mut rng);
        let window = [1, 3, 5, 7, 9][rng.gen_range(0..5)];
        let strict = rng.gen_bool(0.5);
        let policy = if strict { WindowPolicy::Strict } else { WindowPolicy::Shrink };
        let got = series_for(&counts, &articles, window, policy);
        let (want, skipped) = popularity_oracle(&counts, &articles, window, strict);
        ensure(got.points.len() == want.len(), || format!("case {case}: {} points, oracle {}", got.points.len(), want.len()))?;
        ensure(got.skipped_months == skipped, || format!("case {case}: skipped months differ"))?;
        for p in &got.points {
            let w = *want.get(&p.month).ok_or(format!("case {case}: unexpected month {}", p.month))?;
            worst = worst.max((p.score - w).abs());
            ensure((p.score - w).abs() <= 1e-9, || format!("case {case} {}: {} vs oracle {w}", p.month, p.score))?;
        }
        // window 1: the normalized count itself, exactly
        let single = series_for(&counts, &articles, 1, policy);
        for p in &single.points {
            let n = counts.get(&p.month).copied().unwrap_or(0) as f64;
            let m = articles[&p.month] as f64 / 500.0;
            ensure(p.score == n / m, || format!("case {case} T=1 {}: {} != {}", p.month, p.score, n / m))?;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("100 fixtures, max |diff| {worst:.1e}, {elapsed:.2?}"))
}

pub fn scale_normalization_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    for case in 0..100 {
        let (counts, articles) = random_volume_fixture(&mut rng);
        let window = [1, 3, 5][rng.gen_range(0..3)];
        let policy = if rng.gen_bool(0.5) { WindowPolicy::Strict } else { WindowPolicy::Shrink };
        let base = series_for(&counts, &articles, window, policy);
        let k = rng.gen_range(2..20u64);
        let scaled: BTreeMap<_, _> = counts.iter().map(|(m, c)| (*m, c * k)).collect();
        let s = series_for(&scaled, &articles, window, policy);
        for (a, b) in base.points.iter().zip(&s.points) {
            ensure(close(a.score * k as f64, b.score), || format!("case {case}: k-scaling {} * {k} vs {}", a.score, b.score))?;
        }
        let doubled_c: BTreeMap<_, _> = counts.iter().map(|(m, c)| (*m, c * 2)).collect();
        let doubled_a: BTreeMap<_, _> = articles.iter().map(|(m, a)| (*m, a * 2)).collect();
        let d = series_for(&doubled_c, &doubled_a, window, policy);
        ensure(d.points.len() == base.points.len(), || format!("case {case}: doubling changed the month set"))?;
        for (a, b) in base.points.iter().zip(&d.points) {
            ensure(close(a.score, b.score), || format!("case {case}: joint doubling {} vs {}", a.score, b.score))?;
        }
    }
    Ok("100 fixtures, k-scaling and joint doubling within 1e-12".into())
}

// ----------------------------------------------------------------------- bio

fn span_sets(len: usize, types: &[&str]) -> Vec<Vec<(Span, String)>> {
    // every way to place non-overlapping typed spans on 0..len
    fn go(pos: usize, len: usize, types: &[&str], cur: &mut Vec<(Span, String)>, out: &mut Vec<Vec<(Span, String)>>) {
        if pos >= len {
            out.push(cur.clone());
            return;
        }
        go(pos + 1, len, types, cur, out);
        for end in pos + 1..=len {
            for t in types {
                cur.push((Span::new(pos, end), t.to_string()));
                go(end, len, types, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, len, types, &mut Vec::new(), &mut out);
    out
}

fn random_span_set<R: Rng>(rng: &mut R, len: usize, types: &[&str]) -> Vec<(Span, String)> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < len {
        pos += rng.gen_range(0..3);
        if pos >= len {
            break;
        }
        let end = rng.gen_range(pos + 1..=len.min(pos + 4));
        out.push((Span::new(pos, end), types[rng.gen_range(0..types.len())].to_string()));
        pos = end;
    }
    out
}

pub fn bio_check() -> Outcome {
    let types = ["Death", "Lockdown"];
    let mut exhaustive = 0;
    for len in 0..=4 {
        for spans in span_sets(len, &types) {
            let tags = encode_bio_spans(len, &spans);
            ensure(decode_bio_spans(tags.as_slice()) == spans, || format!("round trip failed for {spans:?}"))?;
            exhaustive += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let len = rng.gen_range(5..=10);
        let spans = random_span_set(&mut rng, len, &types);
        let tags = encode_bio_spans(len, &spans);
        ensure(decode_bio_spans(tags.as_slice()) == spans, || format!("round trip failed for {spans:?}"))?;
    }
    // every tag string up to 4 tokens decodes to in-bounds, ordered,
    // disjoint spans that survive a second round trip
    let labels = ["O", "B-Death", "I-Death", "B-Lockdown", "I-Lockdown"];
    for len in 0..=4usize {
        for code in 0..labels.len().pow(len as u32) {
            let mut c = code;
            let tags: Vec<String> = (0..len)
                .map(|_| {
                    let l = labels[c % labels.len()];
                    c /= labels.len();
                    l.to_string()
                })
                .collect();
            let spans = decode_bio_spans(&tags);
            ensure(spans.windows(2).all(|w| w[0].0.end <= w[1].0.start), || format!("{tags:?}: spans overlap"))?;
            ensure(spans.iter().all(|(s, _)| s.start < s.end && s.end <= len), || format!("{tags:?}: bad span"))?;
            let again = decode_bio_spans(encode_bio_spans(len, &spans).as_slice());
            ensure(again == spans, || format!("{tags:?}: not idempotent"))?;
        }
    }
    let t = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    ensure(
        decode_bio_spans(&t(&["I-Death", "O"])) == vec![(Span::new(0, 1), "Death".to_string())],
        || "orphan I- trace".into(),
    )?;
    ensure(
        decode_bio_spans(&t(&["B-Death", "I-Lockdown"]))
            == vec![(Span::new(0, 1), "Death".to_string()), (Span::new(1, 2), "Lockdown".to_string())],
        || "type mismatch trace".into(),
    )?;
    Ok(format!("{exhaustive} exhaustive span sets, 2000 random, repair traces hold"))
}

// -------------------------------------------------------------------- tagger

pub fn tagger_argmax_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vocab = ["lockdown", "deaths", "in", "march", "rose", "the"];
    for case in 0..200 {
        let mut model = LinearTaggerModel::zeros(&["B-A", "I-A", "B-B", "I-B"]);
        let k = model.num_labels();
        let mut feats: Vec<String> = vocab.iter().map(|w| format!("w={w}")).collect();
        feats.push("bias".into());
        for f in feats {
            model.emissions.insert(f, (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect());
        }
        for row in model.transitions.iter_mut() {
            for w in row.iter_mut() {
                *w = rng.gen_range(-3.0..3.0);
            }
        }
        let words: Vec<&str> = (0..4).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect();
        let decoded = model.decode_indices(&words);
        let (best, best_score) = enumerate_best(&model, &words);
        let got = oracle_sequence_score(&model, &words, &decoded);
        ensure((got - best_score).abs() <= 1e-9, || format!("model {case}: decoded score {got} < best {best_score}"))?;
        ensure(decoded == best, || format!("model {case}: {decoded:?} != {best:?}"))?;
    }
    Ok("200 models, 4 tokens, 5 labels, decoder equals enumeration".into())
}

// ------------------------------------------------------------------ patterns

pub fn pattern_oracle_check() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_fixture(dir.path(), 2);
    let snap = Snapshot::load(dir.path()).map_err(|e| e.to_string())?;
    let docs = fixture_documents();
    let patterns = load_patterns(excavator::data::PATTERNS).map_err(|e| e.to_string())?;
    let oracle = oracle_patterns(excavator::data::PATTERNS);
    ensure(patterns.len() == oracle.len(), || "pattern counts differ".into())?;

    let mut by_doc: BTreeMap<&str, Vec<EventMention>> = BTreeMap::new();
    for m in &snap.mentions {
        by_doc.entry(m.doc_id.as_str()).or_default().push(m.clone());
    }
    let mut engine_all = BTreeSet::new();
    let mut oracle_all = BTreeSet::new();
    let mut fired = BTreeSet::new();
    for (id, doc) in &docs {
        let events = by_doc.get(id.as_str()).cloned().unwrap_or_default();
        for s in &doc.sentences {
            let props = propositions_for(doc, s);
            for r in match_patterns(doc, s, &events, &patterns, &props) {
                engine_all.insert((r.left_event, r.right_event, r.subtype.to_string()));
            }
            let in_sentence: Vec<&EventMention> = events.iter().filter(|e| e.sentence_index == s.index).collect();
            let (found, f) = pattern_oracle(s, &in_sentence, &oracle, &props);
            oracle_all.extend(found);
            fired.extend(f);
        }
    }
    ensure(engine_all == oracle_all, || {
        let extra: Vec<_> = engine_all.difference(&oracle_all).take(3).collect();
        let missing: Vec<_> = oracle_all.difference(&engine_all).take(3).collect();
        format!("engine-only {extra:?}, oracle-only {missing:?}")
    })?;
    ensure(docs.len() >= 50, || format!("fixture has {} documents", docs.len()))?;
    ensure(fired.len() >= 12, || format!("only {} shipped patterns fire on the fixture", fired.len()))?;

    // pattern-provenance relations in the artifact are the merged oracle output
    let want: BTreeSet<(String, String, RelationType)> = oracle_all
        .iter()
        .map(|(l, r, s)| (l.clone(), r.clone(), merge_subtype_to_type(s.parse().unwrap())))
        .collect();
    let got: BTreeSet<(String, String, RelationType)> = snap
        .relations
        .iter()
        .filter(|r| r.provenance.contains(&Extractor::Pattern))
        .map(|r| (r.left_event.clone(), r.right_event.clone(), r.kind))
        .collect();
    ensure(got == want, || "pattern relations in relations.jsonl differ from the oracle".into())?;

    let table = [
        (RelationSubtype::Cause, RelationType::Causes),
        (RelationSubtype::Catalyst, RelationType::Causes),
        (RelationSubtype::Precondition, RelationType::Causes),
        (RelationSubtype::Mitigation, RelationType::Mitigates),
        (RelationSubtype::Preventative, RelationType::Mitigates),
        (RelationSubtype::BeforeAfter, RelationType::Before),
    ];
    for (s, t) in table {
        ensure(merge_subtype_to_type(s) == t, || format!("{s} merges to {}", merge_subtype_to_type(s)))?;
    }
    Ok(format!(
        "{} documents, {} relations, {} of {} patterns fire, merge table holds",
        docs.len(),
        oracle_all.len(),
        fired.len(),
        patterns.len()
    ))
}

// -------------------------------------------------------------------- neural

pub fn neural_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let d = rng.gen_range(1..32);
        let v1: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let v2: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let rep = pair_representation(&v1, &v2).map_err(|e| e.to_string())?;
        let mut want = v1.clone();
        want.extend(&v2);
        want.extend(v1.iter().zip(&v2).map(|(a, b)| (a - b).abs()));
        ensure(rep.v == want, || "pair representation differs from (v1, v2, |v1 - v2|)".into())?;
    }
    for _ in 0..500 {
        let scale = [1.0, 50.0, 800.0][rng.gen_range(0..3)];
        let scores: Vec<f64> = (0..7).map(|_| rng.gen_range(-scale..scale)).collect();
        let p = softmax(&scores);
        let total: f64 = p.iter().sum();
        ensure((total - 1.0).abs() <= 1e-9, || format!("softmax sums to {total}"))?;
        ensure(p.iter().all(|x| x.is_finite() && *x >= 0.0), || "softmax not a distribution".into())?;
    }
    // seven well-separated clusters, one per label
    let dim = ClassLabel::ORDER.len();
    let mut data = Vec::new();
    for (i, label) in ClassLabel::ORDER.iter().enumerate() {
        for _ in 0..12 {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.2..0.2)).collect();
            v[i] += 1.0;
            data.push((v, *label));
        }
    }
    let model = train_relation_classifier(&data, 50, 0.5, 3).map_err(|e| e.to_string())?;
    let correct = data
        .iter()
        .filter(|(v, y)| {
            let p = model.probabilities(v);
            let best = (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b });
            ClassLabel::ORDER[best] == *y
        })
        .count();
    ensure(correct == data.len(), || format!("{correct}/{} correct after 50 epochs", data.len()))?;
    Ok(format!("pair representation exact, softmax sums within 1e-9, {correct}/{} separable", data.len()))
}

// ---------------------------------------------------------------------- tcag

pub fn tcag_check() -> Outcome {
    let snap = fixture_snapshot();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut filters: Vec<FilterSpec> = (0..20).map(|_| random_filter(&mut rng, &snap)).collect();
    filters.push(FilterSpec {
        geo: Some("US-CA".into()),
        month: Some("2020-03".parse().unwrap()),
        ..FilterSpec::default()
    });
    for f in &filters {
        let g = build_tcag(&snap.mentions, &snap.relations, &snap.taxonomy, f);
        let want = tcag_recount(&snap.mentions, &snap.relations, &snap.taxonomy, f);
        ensure(graph_counts(&g) == want, || format!("recount differs for {f:?}"))?;
        ensure(export_tcag_json(&g) == export_tcag_json(&g.clone()), || "export not stable".into())?;
        // raising min_edge_count only removes edges
        let mut prev: Option<BTreeMap<(EdgeKind, String, String), u64>> = None;
        for k in 1..=5 {
            let gk = build_tcag(&snap.mentions, &snap.relations, &snap.taxonomy, &FilterSpec { min_edge_count: k, ..f.clone() });
            ensure(gk.nodes == g.nodes, || "min_edge_count changed nodes".into())?;
            let edges: BTreeMap<_, _> = gk.edges.iter().map(|e| ((e.kind, e.left.clone(), e.right.clone()), e.count)).collect();
            ensure(edges.iter().all(|(key, c)| key.0 == EdgeKind::IsA || *c >= k), || format!("edge under min count {k}"))?;
            if let Some(p) = &prev {
                ensure(edges.iter().all(|(key, c)| p.get(key) == Some(c)), || format!("min_edge_count {k} added an edge"))?;
            }
            prev = Some(edges);
        }
    }
    let bytes = export_tcag_json(&snap.tcag);
    ensure(bytes == export_tcag_json(&snap.tcag), || "export not byte-stable".into())?;
    check_golden("tcag.json", &bytes)?;
    let filtered = snap.filtered_tcag(&FilterSpec {
        month: Some("2020-04".parse().unwrap()),
        strict: true,
        rollup: true,
        ..FilterSpec::default()
    });
    check_golden("tcag_2020-04_strict_rollup.json", &export_tcag_json(&filtered))?;
    Ok(format!("{} filters recounted, monotone in min_edge_count, goldens match", filters.len()))
}

// ---------------------------------------------------------------- end to end

pub fn determinism_check() -> Outcome {
    let started = Instant::now();
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_fixture(a.path(), 1);
    run_fixture(b.path(), 4);
    for name in ARTIFACTS {
        let x = fs::read(a.path().join(name)).map_err(|e| e.to_string())?;
        let y = fs::read(b.path().join(name)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{name} differs between runs"))?;
        check_golden(name, &x)?;
    }
    Ok(format!("two runs byte-identical and equal to goldens, {:.2?}", started.elapsed()))
}

// ------------------------------------------------------------------- service

pub fn service_check() -> Outcome {
    let snap = fixture_snapshot();
    let docs = fixture_documents();
    let relations: BTreeMap<String, _> = snap.relations.iter().map(|r| (r.id.clone(), r)).collect();
    let unfiltered = tcag_value(&snap.tcag);
    let nodes: Vec<String> = snap.tcag.nodes.iter().map(|n| n.event_type.clone()).collect();
    let edges: Vec<(EdgeKind, String, String)> = snap
        .tcag
        .edges
        .iter()
        .filter(|e| e.kind != EdgeKind::IsA)
        .map(|e| (e.kind, e.left.clone(), e.right.clone()))
        .collect();
    let server = TestServer::start(snap.clone());
    let get = |target: &str| -> Result<Value, String> {
        let (status, body) = server.get(target);
        ensure(status == 200, || format!("{target}: status {status}: {body}"))?;
        Ok(body)
    };
    let mut requests = 0;

    check_taxonomy_schema(&get("/api/taxonomy")?)?;
    let tcag = get("/api/tcag")?;
    check_tcag_schema(&tcag)?;
    ensure(tcag == unfiltered, || "/api/tcag differs from the snapshot graph".into())?;
    let golden: Value = serde_json::from_slice(&fs::read(golden_dir().join("tcag.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(tcag == golden, || "/api/tcag differs from the golden".into())?;
    requests += 2;

    let sub = get("/api/tcag?geo=US-CA&month=2020-03")?;
    check_tcag_schema(&sub)?;
    let f = FilterSpec {
        geo: Some("US-CA".into()),
        month: Some("2020-03".parse().unwrap()),
        ..FilterSpec::default()
    };
    let (want_nodes, want_edges) = tcag_recount(&snap.mentions, &snap.relations, &snap.taxonomy, &f);
    let got_nodes: BTreeMap<String, u64> = sub["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| (n["event_type"].as_str().unwrap().to_string(), n["mention_count"].as_u64().unwrap()))
        .collect();
    let got_edges: EdgeCounts = sub["edges"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                (e["kind"].as_str().unwrap().to_string(), e["left"].as_str().unwrap().to_string(), e["right"].as_str().unwrap().to_string()),
                e["count"].as_u64().unwrap(),
            )
        })
        .collect();
    ensure(got_nodes == want_nodes && got_edges == want_edges, || "filtered /api/tcag differs from recount".into())?;
    requests += 1;

    for n in &nodes {
        let body = get(&format!("/api/tcag?focus={n}"))?;
        let want = serde_json::to_value(assign_focus_colors(&snap.tcag, n).map_err(|e| e.to_string())?).unwrap();
        ensure(body["colors"] == want, || format!("focus {n}: colors differ"))?;
        ensure(body["colors"][n] == "blue", || format!("focus {n} is not blue"))?;
        requests += 1;
    }

    for n in &nodes {
        check_series_schema(&get(&format!("/api/timeline?event={n}"))?)?;
        requests += 1;
    }
    let series = get("/api/timeline?event=Lockdown&from=2020-02&to=2020-04&window=1&policy=strict")?;
    check_series_schema(&series)?;
    ensure(series["points"].as_array().unwrap().len() == 3, || "timeline from/to not applied".into())?;
    check_top_states_schema(&get("/api/timelines/top_states?event=Unemployment&k=5")?)?;
    check_correlate_schema(&get("/api/correlate?left_event=Lockdown&right_event=EconomicCrisis")?)?;
    check_correlate_schema(&get("/api/correlate?left_event=Death&right_event=FearOrPanic&geo=US-NY")?)?;
    requests += 4;

    let mut items_checked = 0;
    for (kind, l, r) in &edges {
        let body = get(&format!("/api/evidence?kind={kind}&left={l}&right={r}&limit=100"))?;
        check_evidence_schema(&body)?;
        let items = body["items"].as_array().unwrap();
        let edge_count = snap.tcag.edge(*kind, l, r).map_or(0, |e| e.count);
        ensure(body["total"].as_u64() == Some(edge_count), || format!("evidence total for {kind} {l} {r}"))?;
        check_evidence_items(items, &relations, &docs)?;
        items_checked += items.len();
        requests += 1;
    }
    let paged = get("/api/evidence?kind=Causes&left=Lockdown&right=Unemployment&limit=2&offset=1")?;
    check_evidence_schema(&paged)?;

    for (target, status) in [
        ("/api/timeline?event=NoSuchType", 400),
        ("/api/timeline", 400),
        ("/api/tcag?month=March", 400),
        ("/api/tcag?min_count=-1", 400),
        ("/api/tcag?month=2021-01", 400),
        ("/api/tcag?focus=NoSuchNode", 404),
        ("/api/evidence?kind=IsA&left=Lockdown&right=Unemployment", 400),
        ("/api/nowhere", 404),
    ] {
        let (got, body) = server.get(target);
        ensure(got == status, || format!("{target}: {got}, expected {status}"))?;
        ensure(body["error"].is_string(), || format!("{target}: no error message"))?;
        requests += 1;
    }
    let (post, _) = server.request("POST", "/api/tcag");
    ensure(post == 405, || format!("POST gave {post}"))?;
    // read-only: the same request answers the same bytes
    ensure(get("/api/tcag")? == tcag, || "repeated request differs".into())?;
    server.shutdown();
    Ok(format!("{requests} requests, {} focus colorings, {items_checked} evidence items", nodes.len()))
}
