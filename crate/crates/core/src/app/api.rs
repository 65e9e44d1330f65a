//! Transport-free request handling: `(path, query) -> (status, JSON)`.
//!
//! | route                      | parameters                                         |
//! |----------------------------|----------------------------------------------------|
//! | `/api/taxonomy`            |                                                    |
//! | `/api/tcag`                | `geo`, `month`, `min_count`, `strict`, `rollup`, `focus` |
//! | `/api/timeline`            | `event`*, `geo`, `from`, `to`, `window`, `policy`  |
//! | `/api/timelines/top_states`| `event`*, `k`, `from`, `to`                        |
//! | `/api/correlate`           | `left_event`*, `right_event`*, `geo`               |
//! | `/api/evidence`            | `kind`*, `left`*, `right`*, `limit`, `offset`, `geo`, `month` |
//!
//! Starred parameters are required. Bad parameters give 400, unknown routes
//! and unknown focus nodes 404; error bodies are `{"error": message}`.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{json, Value};

use super::Snapshot;
use crate::month::{MonthRange, YearMonth};
use crate::tcag::{assign_focus_colors, tcag_value, EdgeKind, FilterSpec};
use crate::timeline::{
    event_monthly_counts, pearson_correlation, popularity_series, top_geos, PopularitySeries, WindowPolicy,
    DEFAULT_WINDOW,
};

pub const DEFAULT_EVIDENCE_LIMIT: usize = 10;
pub const MAX_EVIDENCE_LIMIT: usize = 100;
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: Value,
}

impl ApiResponse {
    fn ok(body: Value) -> Self {
        ApiResponse { status: 200, body }
    }

    fn error(status: u16, message: impl Into<String>) -> Self {
        ApiResponse {
            status,
            body: json!({ "error": message.into() }),
        }
    }
}

type Params = BTreeMap<String, String>;
type Handled = Result<Value, ApiResponse>;

fn bad(message: impl Into<String>) -> ApiResponse {
    ApiResponse::error(400, message)
}

pub fn parse_query(query: &str) -> Params {
    form_urlencoded::parse(query.as_bytes()).into_owned().collect()
}

fn optional<T: FromStr>(params: &Params, name: &str) -> Result<Option<T>, ApiResponse> {
    match params.get(name).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| bad(format!("invalid value `{v}` for `{name}`"))),
    }
}

fn required<'a>(params: &'a Params, name: &str) -> Result<&'a str, ApiResponse> {
    params
        .get(name)
        .map(String::as_str)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| bad(format!("missing required parameter `{name}`")))
}

fn event_type<'a>(snap: &Snapshot, params: &'a Params, name: &str) -> Result<&'a str, ApiResponse> {
    let ty = required(params, name)?;
    if snap.taxonomy.contains(ty) {
        Ok(ty)
    } else {
        Err(bad(format!("unknown event type `{ty}`")))
    }
}

fn corpus_month(snap: &Snapshot, params: &Params, name: &str) -> Result<Option<YearMonth>, ApiResponse> {
    let month: Option<YearMonth> = optional(params, name)?;
    if let (Some(m), Some(range)) = (month, snap.corpus_stats().month_range()) {
        if !range.contains(m) {
            return Err(bad(format!("`{name}` {m} is outside the corpus range {}..{}", range.from, range.to)));
        }
    }
    Ok(month)
}

/// Answer one GET request.
pub fn handle(snap: &Snapshot, path: &str, query: &str) -> ApiResponse {
    let params = parse_query(query);
    let result = match path.trim_end_matches('/') {
        "/api/taxonomy" => Ok(snap.taxonomy.to_value()),
        "/api/tcag" => tcag(snap, &params),
        "/api/timeline" => timeline(snap, &params),
        "/api/timelines/top_states" => top_states(snap, &params),
        "/api/correlate" => correlate(snap, &params),
        "/api/evidence" => evidence(snap, &params),
        other => Err(ApiResponse::error(404, format!("no route for `{other}`"))),
    };
    result.map_or_else(|e| e, ApiResponse::ok)
}

fn filter_from(snap: &Snapshot, params: &Params) -> Result<FilterSpec, ApiResponse> {
    Ok(FilterSpec {
        geo: optional(params, "geo")?,
        month: corpus_month(snap, params, "month")?,
        min_edge_count: optional(params, "min_count")?.unwrap_or(1),
        strict: optional(params, "strict")?.unwrap_or(false),
        rollup: optional(params, "rollup")?.unwrap_or(false),
    })
}

fn tcag(snap: &Snapshot, params: &Params) -> Handled {
    let filter = filter_from(snap, params)?;
    let graph = snap.filtered_tcag(&filter);
    let mut body = tcag_value(&graph);
    if let Some(focus) = params.get("focus").filter(|f| !f.is_empty()) {
        let colors = assign_focus_colors(&graph, focus).map_err(|e| ApiResponse::error(404, e.to_string()))?;
        body["focus"] = json!(focus);
        body["colors"] = json!(colors);
    }
    Ok(body)
}

fn series_for(
    snap: &Snapshot,
    event: &str,
    geo: Option<&str>,
    window: usize,
    policy: WindowPolicy,
    range: Option<&MonthRange>,
) -> Result<PopularitySeries, ApiResponse> {
    let counts = event_monthly_counts(&snap.mentions, event, geo);
    let series = popularity_series(&counts, &snap.corpus_stats(), window, policy).map_err(|e| bad(e.to_string()))?;
    Ok(match range {
        Some(r) => series.restrict(r),
        None => series,
    })
}

fn month_range(snap: &Snapshot, params: &Params) -> Result<Option<MonthRange>, ApiResponse> {
    let from: Option<YearMonth> = optional(params, "from")?;
    let to: Option<YearMonth> = optional(params, "to")?;
    if from.is_none() && to.is_none() {
        return Ok(None);
    }
    let corpus = snap.corpus_stats().month_range();
    let from = from.or(corpus.map(|r| r.from));
    let to = to.or(corpus.map(|r| r.to));
    match (from, to) {
        (Some(f), Some(t)) if f <= t => Ok(Some(MonthRange::new(f, t))),
        (Some(_), Some(_)) => Err(bad("`from` is after `to`")),
        _ => Ok(None),
    }
}

fn policy(params: &Params) -> Result<WindowPolicy, ApiResponse> {
    match params.get("policy").map(String::as_str) {
        None | Some("") | Some("shrink") => Ok(WindowPolicy::Shrink),
        Some("strict") => Ok(WindowPolicy::Strict),
        Some(other) => Err(bad(format!("invalid value `{other}` for `policy`"))),
    }
}

fn timeline(snap: &Snapshot, params: &Params) -> Handled {
    let event = event_type(snap, params, "event")?;
    let geo: Option<String> = optional(params, "geo")?;
    let window = optional(params, "window")?.unwrap_or(DEFAULT_WINDOW);
    let range = month_range(snap, params)?;
    let series = series_for(snap, event, geo.as_deref(), window, policy(params)?, range.as_ref())?;
    Ok(json!(series))
}

fn top_states(snap: &Snapshot, params: &Params) -> Handled {
    let event = event_type(snap, params, "event")?;
    let k: usize = optional(params, "k")?.unwrap_or(DEFAULT_TOP_K);
    if k == 0 {
        return Err(bad("`k` must be positive"));
    }
    let range = month_range(snap, params)?;
    let states = top_geos(&snap.mentions, event, k, Some("US-"))
        .into_iter()
        .map(|(geo, mentions)| {
            let series = series_for(snap, event, Some(&geo), DEFAULT_WINDOW, WindowPolicy::Shrink, range.as_ref())?;
            Ok(json!({ "geo": geo, "mentions": mentions, "series": series }))
        })
        .collect::<Result<Vec<Value>, ApiResponse>>()?;
    Ok(json!({ "event": event, "k": k, "states": states }))
}

fn correlate(snap: &Snapshot, params: &Params) -> Handled {
    let left = event_type(snap, params, "left_event")?;
    let right = event_type(snap, params, "right_event")?;
    let geo: Option<String> = optional(params, "geo")?;
    let a = series_for(snap, left, geo.as_deref(), DEFAULT_WINDOW, WindowPolicy::Shrink, None)?;
    let b = series_for(snap, right, geo.as_deref(), DEFAULT_WINDOW, WindowPolicy::Shrink, None)?;
    let r = pearson_correlation(&a, &b).map_err(|e| bad(e.to_string()))?;
    Ok(json!({
        "left_event": left,
        "right_event": right,
        "geo": geo,
        "r": r,
        "defined": r.is_some(),
        "left": a,
        "right": b,
    }))
}

fn evidence(snap: &Snapshot, params: &Params) -> Handled {
    let kind_str = required(params, "kind")?;
    let kind = EdgeKind::parse(kind_str)
        .filter(|k| *k != EdgeKind::IsA)
        .ok_or_else(|| bad(format!("invalid relation kind `{kind_str}`")))?;
    let left = event_type(snap, params, "left")?;
    let right = event_type(snap, params, "right")?;
    let limit = optional(params, "limit")?.unwrap_or(DEFAULT_EVIDENCE_LIMIT).min(MAX_EVIDENCE_LIMIT);
    let offset: usize = optional(params, "offset")?.unwrap_or(0);
    let filter = filter_from(snap, params)?;

    let mut matching: Vec<_> = snap
        .relations
        .iter()
        .filter(|r| EdgeKind::from(r.kind) == kind)
        .filter_map(|r| {
            let l = snap.mention(&r.left_event)?;
            let rt = snap.mention(&r.right_event)?;
            (l.event_type == left && rt.event_type == right && filter.admits(l) && filter.admits(rt)).then_some((r, l, rt))
        })
        .collect();
    matching.sort_by(|a, b| {
        b.0.confidence
            .total_cmp(&a.0.confidence)
            .then_with(|| a.0.evidence.published_month.cmp(&b.0.evidence.published_month))
            .then_with(|| a.0.sort_key().cmp(&b.0.sort_key()))
    });
    let total = matching.len();
    let items: Vec<Value> = matching
        .into_iter()
        .skip(offset)
        .take(limit)
        .map(|(r, l, rt)| {
            json!({
                "relation_id": r.id,
                "subtype": r.subtype,
                "confidence": r.confidence,
                "provenance": r.provenance,
                "left_event": r.left_event,
                "right_event": r.right_event,
                "left_text": l.trigger_text,
                "right_text": rt.trigger_text,
                "evidence": r.evidence,
            })
        })
        .collect();
    Ok(json!({
        "kind": kind,
        "left": left,
        "right": right,
        "total": total,
        "limit": limit,
        "offset": offset,
        "items": items,
    }))
}
