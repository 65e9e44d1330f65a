//! Monthly event counts, normalized popularity series and correlation.
//!
//! The popularity of event type `e` at month `t` is the mean, over the
//! window `t-h ..= t+h` with `h = T / 2`, of `N(e,t') / M(t')`, where
//! `N(e,t')` counts the mentions of `e` in month `t'` and
//! `M(t') = articles(t') / 500`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusStats;
use crate::extraction::EventMention;
use crate::month::{MonthRange, YearMonth};

pub const NORM_DIVISOR: f64 = 500.0;
pub const DEFAULT_WINDOW: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TimelineError {
    #[error("window must be an odd number of months, got {0}")]
    InvalidWindow(usize),
    #[error("series overlap in {0} months; at least 2 are needed")]
    TooFewOverlap(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthlyCounts {
    pub event_type: String,
    pub geo: Option<String>,
    pub counts: BTreeMap<YearMonth, u64>,
}

/// Mentions of `event_type` per month. With a `geo`, only mentions resolved
/// to that location are counted. Mentions without a month are ignored.
pub fn event_monthly_counts(mentions: &[EventMention], event_type: &str, geo: Option<&str>) -> MonthlyCounts {
    let mut counts = BTreeMap::new();
    for m in mentions {
        if m.event_type != event_type {
            continue;
        }
        if geo.is_some() && m.geo.as_deref() != geo {
            continue;
        }
        if let Some(month) = m.month {
            *counts.entry(month).or_default() += 1;
        }
    }
    MonthlyCounts {
        event_type: event_type.to_string(),
        geo: geo.map(str::to_string),
        counts,
    }
}

/// How a window that runs past the corpus range, or over months without
/// articles, is averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowPolicy {
    /// Average over the window months that have articles.
    #[default]
    Shrink,
    /// Always divide by the full window length.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopularityPoint {
    pub month: YearMonth,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularitySeries {
    pub event: String,
    pub geo: Option<String>,
    pub window: usize,
    pub norm_divisor: f64,
    pub policy: WindowPolicy,
    pub points: Vec<PopularityPoint>,
    /// Months with no articles anywhere in their window.
    pub skipped_months: Vec<YearMonth>,
}

impl PopularitySeries {
    /// Keep only the points (and skipped months) inside `range`.
    pub fn restrict(mut self, range: &MonthRange) -> Self {
        self.points.retain(|p| range.contains(p.month));
        self.skipped_months.retain(|m| range.contains(*m));
        self
    }

    pub fn score(&self, month: YearMonth) -> Option<f64> {
        self.points.iter().find(|p| p.month == month).map(|p| p.score)
    }
}

/// Popularity for every month of the corpus range. The window never reaches
/// outside that range.
pub fn popularity_series(
    counts: &MonthlyCounts,
    stats: &CorpusStats,
    window: usize,
    policy: WindowPolicy,
) -> Result<PopularitySeries, TimelineError> {
    if window.is_multiple_of(2) {
        return Err(TimelineError::InvalidWindow(window));
    }
    let half = (window / 2) as i64;
    let mut points = Vec::new();
    let mut skipped_months = Vec::new();
    if let Some(range) = stats.month_range() {
        for t in range.months() {
            let mut sum = 0.0;
            let mut included = 0usize;
            for d in -half..=half {
                let m = t.offset(d);
                let articles = stats.articles(m);
                if !range.contains(m) || articles == 0 {
                    continue;
                }
                let n = counts.counts.get(&m).copied().unwrap_or(0) as f64;
                sum += n / (articles as f64 / NORM_DIVISOR);
                included += 1;
            }
            if included == 0 {
                skipped_months.push(t);
                continue;
            }
            let denom = match policy {
                WindowPolicy::Shrink => included,
                WindowPolicy::Strict => window,
            };
            points.push(PopularityPoint {
                month: t,
                score: sum / denom as f64,
            });
        }
    }
    Ok(PopularitySeries {
        event: counts.event_type.clone(),
        geo: counts.geo.clone(),
        window,
        norm_divisor: NORM_DIVISOR,
        policy,
        points,
        skipped_months,
    })
}

/// Pearson correlation over the months both series share. `Ok(None)` means
/// undefined: one of the series is constant on the overlap.
pub fn pearson_correlation(a: &PopularitySeries, b: &PopularitySeries) -> Result<Option<f64>, TimelineError> {
    let bm: BTreeMap<YearMonth, f64> = b.points.iter().map(|p| (p.month, p.score)).collect();
    let pairs: Vec<(f64, f64)> = a
        .points
        .iter()
        .filter_map(|p| bm.get(&p.month).map(|y| (p.score, *y)))
        .collect();
    if pairs.len() < 2 {
        return Err(TimelineError::TooFewOverlap(pairs.len()));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// The `k` geolocations with the most mentions of `event_type`, optionally
/// restricted to ids starting with `prefix` (such as `US-`). Ties break by id.
pub fn top_geos(mentions: &[EventMention], event_type: &str, k: usize, prefix: Option<&str>) -> Vec<(String, u64)> {
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for m in mentions.iter().filter(|m| m.event_type == event_type) {
        if let Some(g) = m.geo.as_deref() {
            if prefix.is_none_or(|p| g.starts_with(p)) {
                *totals.entry(g).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, u64)> = totals.into_iter().map(|(g, c)| (g.to_string(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}
